#include "nicrep/cli.hpp"

int main(int argc, char** argv) {
    return nicrep::cli_main(argc, argv);
}
