// Regenerates the bundled files under data/ from fixed seeds.
//
//   make_toy_data <data-dir>

#include <filesystem>
#include <iostream>

#include "dexparse/treebank_io.hpp"
#include "toy_data.hpp"

using namespace dexparse;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_toy_data <data-dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  for (const auto& [name, text] : toy_data::bundle()) {
    write_file((dir / name).string(), text);
    std::cout << (dir / name).string() << "\n";
  }
  return 0;
}
