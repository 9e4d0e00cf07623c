#include "twistframe/report.hpp"

int main(int argc, char** argv) { return twistframe::cli::run(argc, argv); }
