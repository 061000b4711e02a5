#pragma once

#include <cstdint>
#include <vector>

namespace streamdec {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

} // namespace streamdec
