#include <iostream>

#include "synclip/app/commands.hpp"

int main(int argc, char** argv) {
  try {
    return synclip::app::run_cli(argc, argv, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return synclip::app::kExitInternal;
  }
}
