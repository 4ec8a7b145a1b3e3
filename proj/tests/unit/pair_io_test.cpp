#include <gtest/gtest.h>

#include <sstream>

#include "synthetic.hpp"
#include "trajfill/error.hpp"
#include "trajfill/pair_io.hpp"

using namespace trajfill;

TEST(PairIo, RoundTripKeepsValuesAndMissing) {
  const auto pair = synth::make_pair(synth::make_leader(3), synth::reference_gipps());
  const auto hidden = pair.with_headway(synth::with_missing(pair.headway(), 100, 140));
  std::stringstream buf;
  write_pair(buf, hidden);
  const VehiclePair back = read_pair(buf);
  ASSERT_EQ(back.headway().size(), hidden.headway().size());
  EXPECT_NEAR(*back.leader().vehicle_length(), synth::kLeaderLength, 1e-9);
  for (std::size_t i = 0; i < back.headway().size(); ++i) {
    ASSERT_EQ(back.headway().present(i), hidden.headway().present(i)) << i;
    if (hidden.headway().present(i)) EXPECT_NEAR(back.headway().at(i), hidden.headway().at(i), 1e-6);
    EXPECT_NEAR(*back.follower()[i].x, *hidden.follower()[i].x, 1e-6);
    EXPECT_NEAR(*back.follower()[i].v, *hidden.follower()[i].v, 1e-6);
    EXPECT_EQ(back.leader()[i].x.has_value(), hidden.headway().present(i));
  }
}

TEST(PairIo, LeaderLengthFromMedianWhenMetadataMissing) {
  std::stringstream in;
  in << kPairHeader << "\n0.0,20,0,10,15\n0.1,21,1,10,15\n0.2,22,2,10,15\n";
  const auto pair = read_pair(in);
  EXPECT_NEAR(*pair.leader().vehicle_length(), 5.0, 1e-12);
  EXPECT_NEAR(*pair.leader()[1].v, 10.0, 1e-9);
}

TEST(PairIo, RequiresHeaderAndGrid) {
  std::stringstream no_header("0.0,20,0,10,15\n0.1,21,1,10,15\n");
  EXPECT_THROW(read_pair(no_header), Error);
  std::stringstream off_grid;
  off_grid << kPairHeader << "\n0.0,20,0,10,15\n0.15,21,1,10,15\n";
  EXPECT_THROW(read_pair(off_grid), Error);
  std::stringstream bad_number;
  bad_number << kPairHeader << "\n0.0,20,0,10,15\n0.1,2x,1,10,15\n";
  try {
    read_pair(bad_number);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
  }
}

TEST(PairIo, HeadwayOnlyRoundTrip) {
  const HeadwaySeries s(1.0, {12.0, std::nullopt, 12.5, 13.0});
  std::stringstream buf;
  write_headway(buf, s, "scan");
  const auto back = read_headway(buf);
  EXPECT_NEAR(back.t0(), 1.0, 1e-12);
  ASSERT_EQ(back.size(), 4u);
  EXPECT_FALSE(back.present(1));
  EXPECT_NEAR(back.at(3), 13.0, 1e-12);
}
