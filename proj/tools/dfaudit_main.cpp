#include "dfaudit/cli.hpp"

int main(int argc, char** argv) {
    return dfaudit::cli::run(argc, argv);
}
