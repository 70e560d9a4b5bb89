#include "lorentzlab/app/cli.hpp"

int main(int argc, char** argv) { return lorentzlab::app::run_cli(argc, argv); }
