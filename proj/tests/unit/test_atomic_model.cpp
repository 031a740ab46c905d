#include <gtest/gtest.h>

#include "spamsim/atomic_model.hpp"

using namespace spamsim;

TEST(StateLabel, BasisValidation) {
  EXPECT_NO_THROW(StateLabel::basis(Manifold::A, 2, -2));
  EXPECT_NO_THROW(StateLabel::basis(Manifold::B, 1, 1));
  EXPECT_THROW(StateLabel::basis(Manifold::A, 3, 0), std::invalid_argument);
  EXPECT_THROW(StateLabel::basis(Manifold::A, 1, 2), std::invalid_argument);
  EXPECT_THROW(StateLabel::basis(Manifold::B, 0, 0), std::invalid_argument);
}

TEST(StateLabel, SentinelsCarryNoQuantumNumbers) {
  for (const auto& s : {StateLabel::wrong_ground(), StateLabel::lost()}) {
    EXPECT_TRUE(s.is_sentinel());
    EXPECT_THROW(s.F(), std::logic_error);
    EXPECT_THROW(s.mF(), std::logic_error);
    EXPECT_THROW(s.manifold(), std::logic_error);
  }
  EXPECT_TRUE(StateLabel::wrong_ground().in_ground());
  EXPECT_TRUE(StateLabel::wrong_ground().fluoresces());
  EXPECT_FALSE(StateLabel::lost().fluoresces());
  EXPECT_FALSE(StateLabel::lost().in_metastable());
}

TEST(StateLabel, ParseRoundTrip) {
  for (const auto& s : {ground_state(2, 0), ground_state(1, 0), metastable_state(2, -1), metastable_state(1, -1),
                        metastable_state(2, 1), StateLabel::wrong_ground(), StateLabel::lost()}) {
    EXPECT_EQ(StateLabel::parse(s.to_string()), s) << s.to_string();
  }
  EXPECT_EQ(ground_state(2, 0).to_string(), "A:F=2,mF=0");
  EXPECT_THROW(StateLabel::parse("C:F=2,mF=0"), std::invalid_argument);
  EXPECT_THROW(StateLabel::parse("A:F=1,mF=-2"), std::invalid_argument);
  EXPECT_THROW(StateLabel::parse(""), std::invalid_argument);
}

TEST(Encoding, CatalogMatchesReferenceStates) {
  const auto m = encoding_catalog(EncodingName::Metastable);
  EXPECT_EQ(m.zero, metastable_state(2, -1));
  EXPECT_EQ(m.one, metastable_state(1, -1));
  const auto g = encoding_catalog(EncodingName::Ground);
  EXPECT_EQ(g.zero, ground_state(2, 0));
  EXPECT_EQ(g.one, ground_state(1, 0));
  const auto o = encoding_catalog(EncodingName::Optical);
  EXPECT_EQ(o.zero, metastable_state(2, -1));
  EXPECT_EQ(o.one, ground_state(2, 0));
}

TEST(Encoding, ManifoldInvariants) {
  for (auto name : {EncodingName::Optical, EncodingName::Metastable, EncodingName::Ground}) {
    const auto e = encoding_catalog(name);
    EXPECT_NE(e.zero, e.one);
    for (const auto& s : e.intermediates) {
      EXPECT_NE(s, e.zero);
      EXPECT_NE(s, e.one);
    }
    switch (name) {
      case EncodingName::Optical:
        EXPECT_TRUE(e.zero.in_metastable());
        EXPECT_TRUE(e.one.in_ground());
        break;
      case EncodingName::Metastable:
        EXPECT_TRUE(e.zero.in_metastable() && e.one.in_metastable());
        break;
      case EncodingName::Ground:
        EXPECT_TRUE(e.zero.in_ground() && e.one.in_ground());
        break;
    }
  }
}

TEST(Encoding, ParseNames) {
  EXPECT_EQ(parse_encoding("O"), EncodingName::Optical);
  EXPECT_EQ(parse_encoding("metastable"), EncodingName::Metastable);
  EXPECT_EQ(parse_encoding("g"), EncodingName::Ground);
  EXPECT_THROW(parse_encoding("X"), std::invalid_argument);
  EXPECT_EQ(parse_qubit_value("one"), QubitValue::One);
}

TEST(TransitionAllowed, CrossManifoldOnly) {
  EXPECT_TRUE(transition_allowed(ground_state(2, 0), metastable_state(2, -1)));
  EXPECT_FALSE(transition_allowed(metastable_state(2, -1), metastable_state(1, -1)));
  EXPECT_FALSE(transition_allowed(ground_state(2, 0), ground_state(1, 0)));
  EXPECT_THROW(transition_allowed(StateLabel::wrong_ground(), metastable_state(2, -1)), std::invalid_argument);
  EXPECT_THROW(transition_allowed(ground_state(2, 0), StateLabel::lost()), std::invalid_argument);
}
