#include "seqmotif/labels.hpp"

namespace seqmotif {

std::string_view describe(RecencyLabel l) {
  switch (l) {
    case RecencyLabel::A:
      return "The contributor also made the previous editing session in this article";
    case RecencyLabel::B:
      return "The contributor was active in the editing session preceding the last session";
    case RecencyLabel::C:
      return "The contributor was active in this article 3-5 editing sessions prior";
    case RecencyLabel::D:
      return "The contributor was active in this article >=6 editing sessions prior";
    case RecencyLabel::E:
      return "The first editing session of the contributor to this article";
    case RecencyLabel::F:
      return "The first editing session of the contributor in Wikipedia";
  }
  return "";
}

}  // namespace seqmotif
