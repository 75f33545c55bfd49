#pragma once

#include <cstdint>
#include <vector>

namespace uie {

using TokenId = int32_t;
using TokenSequence = std::vector<TokenId>;

}  // namespace uie
