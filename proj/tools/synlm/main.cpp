#include "synlm/commands.hpp"

int main(int argc, char** argv) { return synlm::cli::main_entry(argc, argv); }
