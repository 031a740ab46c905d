#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace spamsim {

/// A: ground manifold (fluoresces under detection). B: metastable manifold.
enum class Manifold { A, B };

/// A basis state |manifold, F, mF> or one of two sentinels.
///
/// WrongGround stands for any A population outside the pulse-addressed states
/// (failed pumping, decayed or deshelved population). It fluoresces during
/// detection and is never moved by a transfer pulse. Lost means no ion.
class StateLabel {
 public:
  enum class Kind : unsigned char { Basis, WrongGround, Lost };

  static StateLabel basis(Manifold manifold, int F, int mF);
  static constexpr StateLabel wrong_ground() { return StateLabel(Kind::WrongGround); }
  static constexpr StateLabel lost() { return StateLabel(Kind::Lost); }

  /// Parses "A:F=2,mF=0", "B:F=1,mF=-1", "WrongGround" or "Lost".
  static StateLabel parse(std::string_view text);

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_sentinel() const { return kind_ != Kind::Basis; }
  constexpr bool is_lost() const { return kind_ == Kind::Lost; }

  // Throw std::logic_error on sentinels.
  Manifold manifold() const;
  int F() const;
  int mF() const;

  /// True for basis states in A and for WrongGround.
  constexpr bool in_ground() const {
    return kind_ == Kind::WrongGround || (kind_ == Kind::Basis && manifold_ == Manifold::A);
  }
  constexpr bool in_metastable() const { return kind_ == Kind::Basis && manifold_ == Manifold::B; }
  constexpr bool fluoresces() const { return in_ground(); }

  std::string to_string() const;

  constexpr auto operator<=>(const StateLabel&) const = default;

 private:
  constexpr explicit StateLabel(Kind kind) : kind_(kind) {}
  constexpr StateLabel(Manifold m, int F, int mF) : kind_(Kind::Basis), manifold_(m), F_(F), mF_(mF) {}

  Kind kind_ = Kind::Lost;
  Manifold manifold_ = Manifold::A;
  int F_ = 0;
  int mF_ = 0;
};

// Shorthands for the basis states used by the 137Ba+ sequences.
StateLabel ground_state(int F, int mF);
StateLabel metastable_state(int F, int mF);

enum class EncodingName { Optical, Metastable, Ground };
enum class QubitValue { Zero, One };

std::string_view to_string(EncodingName name);
std::string_view short_name(EncodingName name);  // "O", "M", "G"
/// Accepts "O"/"M"/"G" and the full names, case-insensitive.
EncodingName parse_encoding(std::string_view text);
std::string_view to_string(QubitValue value);
QubitValue parse_qubit_value(std::string_view text);

struct QubitEncoding {
  EncodingName name;
  StateLabel zero;
  StateLabel one;
  std::vector<StateLabel> intermediates;  // transfer-only states

  const StateLabel& state_of(QubitValue value) const { return value == QubitValue::Zero ? zero : one; }
  bool operator==(const QubitEncoding&) const = default;
};

QubitEncoding encoding_catalog(EncodingName name);

/// Transfer pulses only connect the two manifolds. Throws on sentinels.
bool transition_allowed(const StateLabel& from, const StateLabel& to);

}  // namespace spamsim
