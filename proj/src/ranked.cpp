#include "stir/ranked.hpp"

#include "stir/report.hpp"

namespace stir {

namespace {

template <typename Mass, typename Fmt>
std::string render(const RankedMassVector<Mass>& v, Fmt fmt) {
  std::string out = "(" + fmt(v.active) + ";";
  for (std::size_t j = 0; j < v.tail.size(); ++j) out += (j ? "," : " ") + fmt(v.tail[j]);
  return out + ")";
}

}  // namespace

std::string to_string(const IntVector& v) {
  return render(v, [](std::int64_t m) { return std::to_string(m); });
}

std::string to_string(const RealVector& v) { return render(v, format_real); }

}  // namespace stir
