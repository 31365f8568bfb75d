#include "app.hpp"

int main(int argc, char** argv) { return ssflab::cli::run(argc, argv); }
