#include "tbsim/cli.hpp"

int main(int argc, char** argv) { return tbsim::cli_dispatch(argc, argv); }
