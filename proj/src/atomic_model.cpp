#include "spamsim/atomic_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>

namespace spamsim {
namespace {

int parse_int(std::string_view text, std::string_view whole) {
  int value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw std::invalid_argument("malformed state label: " + std::string(whole));
  }
  return value;
}

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

StateLabel StateLabel::basis(Manifold manifold, int F, int mF) {
  if (F != 1 && F != 2) throw std::invalid_argument("hyperfine F must be 1 or 2");
  if (mF < -F || mF > F) throw std::invalid_argument("|mF| must not exceed F");
  return StateLabel(manifold, F, mF);
}

StateLabel StateLabel::parse(std::string_view text) {
  if (text == "WrongGround") return wrong_ground();
  if (text == "Lost") return lost();
  // <M>:F=<f>,mF=<m>
  if (text.size() < 9 || (text[0] != 'A' && text[0] != 'B') || text.substr(1, 3) != ":F=") {
    throw std::invalid_argument("malformed state label: " + std::string(text));
  }
  const auto comma = text.find(",mF=");
  if (comma == std::string_view::npos) {
    throw std::invalid_argument("malformed state label: " + std::string(text));
  }
  const int F = parse_int(text.substr(4, comma - 4), text);
  const int mF = parse_int(text.substr(comma + 4), text);
  return basis(text[0] == 'A' ? Manifold::A : Manifold::B, F, mF);
}

Manifold StateLabel::manifold() const {
  if (is_sentinel()) throw std::logic_error("sentinel state has no manifold");
  return manifold_;
}

int StateLabel::F() const {
  if (is_sentinel()) throw std::logic_error("sentinel state has no F");
  return F_;
}

int StateLabel::mF() const {
  if (is_sentinel()) throw std::logic_error("sentinel state has no mF");
  return mF_;
}

std::string StateLabel::to_string() const {
  switch (kind_) {
    case Kind::WrongGround:
      return "WrongGround";
    case Kind::Lost:
      return "Lost";
    case Kind::Basis:
      break;
  }
  std::string out = manifold_ == Manifold::A ? "A" : "B";
  out += ":F=" + std::to_string(F_) + ",mF=" + std::to_string(mF_);
  return out;
}

StateLabel ground_state(int F, int mF) { return StateLabel::basis(Manifold::A, F, mF); }
StateLabel metastable_state(int F, int mF) { return StateLabel::basis(Manifold::B, F, mF); }

std::string_view to_string(EncodingName name) {
  switch (name) {
    case EncodingName::Optical:
      return "Optical";
    case EncodingName::Metastable:
      return "Metastable";
    case EncodingName::Ground:
      return "Ground";
  }
  throw std::invalid_argument("unknown encoding");
}

std::string_view short_name(EncodingName name) {
  switch (name) {
    case EncodingName::Optical:
      return "O";
    case EncodingName::Metastable:
      return "M";
    case EncodingName::Ground:
      return "G";
  }
  throw std::invalid_argument("unknown encoding");
}

EncodingName parse_encoding(std::string_view text) {
  const std::string key = lower(text);
  if (key == "o" || key == "optical") return EncodingName::Optical;
  if (key == "m" || key == "metastable") return EncodingName::Metastable;
  if (key == "g" || key == "ground") return EncodingName::Ground;
  throw std::invalid_argument("unknown encoding: " + std::string(text));
}

std::string_view to_string(QubitValue value) { return value == QubitValue::Zero ? "0" : "1"; }

QubitValue parse_qubit_value(std::string_view text) {
  const std::string key = lower(text);
  if (key == "0" || key == "zero") return QubitValue::Zero;
  if (key == "1" || key == "one") return QubitValue::One;
  throw std::invalid_argument("unknown qubit value: " + std::string(text));
}

// State pairs of the O, M and G qubits in 137Ba+, with the grey transfer
// states used by their preparation and readout sequences.
QubitEncoding encoding_catalog(EncodingName name) {
  switch (name) {
    case EncodingName::Optical:
      return {name, metastable_state(2, -1), ground_state(2, 0), {metastable_state(1, -1)}};
    case EncodingName::Metastable:
      return {name, metastable_state(2, -1), metastable_state(1, -1), {ground_state(2, 0)}};
    case EncodingName::Ground:
      return {name,
              ground_state(2, 0),
              ground_state(1, 0),
              {metastable_state(2, -1), metastable_state(2, 1), metastable_state(1, -1)}};
  }
  throw std::invalid_argument("unknown encoding");
}

bool transition_allowed(const StateLabel& from, const StateLabel& to) {
  if (from.is_sentinel() || to.is_sentinel()) {
    throw std::invalid_argument("transfer pulses are defined between basis states only");
  }
  return from.manifold() != to.manifold();
}

}  // namespace spamsim
