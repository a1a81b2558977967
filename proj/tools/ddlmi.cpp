#include "ddlmi/cli.hpp"

int main(int argc, char** argv)
{
    return ddlmi::cli::run(std::vector<std::string>(argv, argv + argc));
}
