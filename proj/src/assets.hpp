#pragma once

#include <string_view>

// Contents of the files under assets/, compiled in.
namespace cogspan::assets {

std::string_view prompt_template();
std::string_view exemplars();
std::string_view starter_lexicon();

}  // namespace cogspan::assets
