#include "cli/app.hpp"

int main(int argc, char** argv)
{
    return rbising::cli::run_cli(argc, argv);
}
