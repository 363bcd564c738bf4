#pragma once

#include <string_view>

// Contents of data/*.txt, compiled in so the binary needs no data directory.
namespace judgekit::data {
extern const std::string_view kPosLexicon;
extern const std::string_view kHedges;
extern const std::string_view kDiscourseMarkers;
}  // namespace judgekit::data
