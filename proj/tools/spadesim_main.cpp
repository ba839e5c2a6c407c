#include "cli_app.hpp"

int main(int argc, char** argv) { return spadesim::cli::run(argc, argv); }
