#include "app.hpp"

int main(int argc, char** argv) { return reslab::app::cli_main(argc, argv); }
