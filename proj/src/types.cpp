#include "aoi/types.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace aoi {

const char* to_string(Policy p) {
  switch (p) {
    case Policy::FSFS: return "fsfs";
    case Policy::ESFS: return "esfs";
    case Policy::SBR: return "sbr";
  }
  return "?";
}

Policy policy_from_string(const std::string& s) {
  std::string t;
  for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "fsfs") return Policy::FSFS;
  if (t == "esfs") return Policy::ESFS;
  if (t == "sbr") return Policy::SBR;
  throw std::invalid_argument("unknown policy: " + s);
}

namespace tag {
std::string to_string(int code) {
  switch (code) {
    case k1p: return "1p";
    case k1c: return "1c";
    case k1n: return "1n";
    default: return std::to_string(code);
  }
}
}  // namespace tag

SourceParams::SourceParams(std::vector<double> lambdas_in, std::vector<double> mus_in)
    : lambdas(std::move(lambdas_in)), mus(std::move(mus_in)) {
  if (lambdas.empty() || lambdas.size() != mus.size()) {
    throw std::invalid_argument("SourceParams: need equal-length, nonempty rate vectors");
  }
  for (double r : lambdas) {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("SourceParams: arrival rates must be positive and finite");
  }
  for (double r : mus) {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("SourceParams: service rates must be positive and finite");
  }
}

double SourceParams::total_load() const {
  double rho = 0.0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) rho += lambdas[i] / mus[i];
  return rho;
}

double SourceParams::total_arrival_rate() const {
  double s = 0.0;
  for (double r : lambdas) s += r;
  return s;
}

SourceParams SourceParams::with_swapped(int a, int b) const {
  if (a < 1 || b < 1 || a > count() || b > count()) {
    throw std::invalid_argument("SourceParams::with_swapped: index out of range");
  }
  SourceParams out = *this;
  std::swap(out.lambdas[a - 1], out.lambdas[b - 1]);
  std::swap(out.mus[a - 1], out.mus[b - 1]);
  return out;
}

PhaseState sentinel_state() { return PhaseState{4, StateTuple{kSentinelServer, {}, {}}}; }

namespace {

void append_seq(std::ostringstream& os, const std::vector<int>& v, char open, char close) {
  os << open;
  if (v.empty()) {
    os << '0';
  } else {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) os << ',';
      os << tag::to_string(v[i]);
    }
  }
  os << close;
}

}  // namespace

std::string to_string(const ObserverState& s, Policy p) {
  std::ostringstream os;
  if (p == Policy::ESFS) {
    os << '(';
    append_seq(os, s.order, '(', ')');
    if (s.server == 0) {
      os << ",{-1})";
    } else {
      os << ',';
      append_seq(os, s.queue, '{', '}');
      os << ')';
    }
    return os.str();
  }
  os << '(' << tag::to_string(s.server) << ',';
  append_seq(os, s.queue, '(', ')');
  os << ')';
  return os.str();
}

std::string to_string(const PhaseState& s, Policy p) {
  if (s.phase == 4) return "P4:(-1,(-1))";
  std::ostringstream os;
  os << 'P' << s.phase << ':' << to_string(s.t, p);
  return os.str();
}

}  // namespace aoi
