#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <map>
#include <random>

#include "pcattn/errors.hpp"
#include "pcattn/pcio/augment.hpp"
#include "pcattn/pcio/off.hpp"
#include "pcattn/pcio/pcb.hpp"
#include "pcattn/pcio/point_cloud.hpp"
#include "pcattn/pcio/synthetic.hpp"
#include "support.hpp"

using namespace pcattn;
using namespace pcattn::pcio;

namespace {

const char* kCubeOff = R"(OFF
# unit cube
8 6 0
0 0 0
1 0 0
1 1 0
0 1 0
0 0 1
1 0 1
1 1 1
0 1 1
4 0 1 2 3
4 4 5 6 7
4 0 1 5 4
4 1 2 6 5
4 2 3 7 6
4 3 0 4 7
)";

double dist(const Vec3& a, const Vec3& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

Vec3 centroid(const std::vector<Vec3>& pts) {
  Vec3 c{0, 0, 0};
  for (const auto& p : pts) {
    for (int k = 0; k < 3; ++k) c[k] += p[k] / static_cast<double>(pts.size());
  }
  return c;
}

PointCloud random_cloud(std::size_t n, std::mt19937_64& rng) {
  PointCloud pc;
  for (std::size_t i = 0; i < n; ++i) {
    auto u = oracle::uniform(3, rng);
    pc.positions.push_back({u[0], u[1], u[2]});
  }
  return pc;
}

}  // namespace

TEST(Off, CubeFanTriangulated) {
  const Mesh m = parse_off(kCubeOff);
  EXPECT_EQ(m.vertices.size(), 8u);
  EXPECT_EQ(m.faces.size(), 12u);
  EXPECT_EQ(m.faces[0], (std::array<std::uint32_t, 3>{0, 1, 2}));
  EXPECT_EQ(m.faces[1], (std::array<std::uint32_t, 3>{0, 2, 3}));
}

TEST(Off, SingleVertexNoFaces) {
  const Mesh m = parse_off("OFF\n1 0 0\n0 0 0\n");
  EXPECT_EQ(m.vertices.size(), 1u);
  EXPECT_TRUE(m.faces.empty());
}

TEST(Off, HeaderOptionalAndFused) {
  EXPECT_EQ(parse_off("3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").faces.size(), 1u);
  EXPECT_EQ(parse_off("OFF3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").faces.size(), 1u);
}

TEST(Off, IndexOutOfRangeNamesLine) {
  std::string text = kCubeOff;
  text.replace(text.find("4 2 3 7 6"), 9, "4 2 3 9 6");
  try {
    parse_off(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 16u);
    EXPECT_NE(std::string(e.what()).find("line 16"), std::string::npos);
  }
}

TEST(Off, RejectsMalformedInput) {
  EXPECT_THROW(parse_off("OFF\n2 0 0\n0 0 0\n"), ParseError);                     // missing vertex
  EXPECT_THROW(parse_off("OFF\n1 0 0\n0 x 0\n"), ParseError);                     // non-numeric
  EXPECT_THROW(parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 0 2\n"), ParseError);  // repeated vertex
  EXPECT_THROW(parse_off("OFF\n1 0 0\n0 0 0\n5 5 5\n"), ParseError);              // trailing data
  EXPECT_THROW(parse_off(""), ParseError);
}

TEST(Off, SerializeRoundTrip) {
  std::mt19937_64 rng(1);
  Mesh m;
  for (int i = 0; i < 10; ++i) {
    auto u = oracle::uniform(3, rng, -100, 100);
    m.vertices.push_back({u[0], u[1], u[2] * 1e-7});
  }
  for (std::uint32_t i = 0; i + 2 < 10; ++i) m.faces.push_back({i, i + 1, i + 2});
  EXPECT_EQ(parse_off(serialize_off(m)), m);
  EXPECT_EQ(parse_off(serialize_off(parse_off(kCubeOff))), parse_off(kCubeOff));
}

TEST(SampleSurface, PointsLieOnTriangle) {
  Mesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 1}, {0, 2, 1}};
  m.faces = {{0, 1, 2}};
  const PointCloud pc = sample_surface(m, 500, 3);
  ASSERT_EQ(pc.size(), 500u);
  // plane through the three vertices: normal = (v1 - v0) x (v2 - v0)
  const Vec3 nrm{0 * 1 - 1 * 2, 1 * 0 - 1 * 1, 1 * 2 - 0 * 0};
  const double len = std::sqrt(nrm[0] * nrm[0] + nrm[1] * nrm[1] + nrm[2] * nrm[2]);
  for (const auto& p : pc.positions) {
    EXPECT_LT(std::abs(p[0] * nrm[0] + p[1] * nrm[1] + p[2] * nrm[2]) / len, 1e-9);
    // barycentric validity in the xy projection
    const double u = p[0], v = p[1] / 2.0;
    EXPECT_GE(u, -1e-12);
    EXPECT_GE(v, -1e-12);
    EXPECT_LE(u + v, 1 + 1e-12);
  }
}

TEST(SampleSurface, AreaWeightedSplit) {
  // Triangle A has area 1.5, triangle B area 0.5, far apart along x.
  Mesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 3, 0}, {10, 0, 0}, {11, 0, 0}, {10, 1, 0}};
  m.faces = {{0, 1, 2}, {3, 4, 5}};
  const std::size_t n = 4000;
  const PointCloud pc = sample_surface(m, n, 11);
  std::size_t in_a = 0;
  for (const auto& p : pc.positions) in_a += p[0] < 5.0 ? 1 : 0;
  const double mean = 0.75 * n;
  const double sigma = std::sqrt(n * 0.75 * 0.25);
  EXPECT_LT(std::abs(static_cast<double>(in_a) - mean), 5 * sigma);
}

TEST(SampleSurface, DeterministicAndDegenerate) {
  const Mesh cube = parse_off(kCubeOff);
  EXPECT_EQ(sample_surface(cube, 64, 5), sample_surface(cube, 64, 5));
  EXPECT_NE(sample_surface(cube, 64, 5), sample_surface(cube, 64, 6));
  Mesh flat;
  flat.vertices = {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}};
  flat.faces = {{0, 1, 2}};
  EXPECT_THROW(sample_surface(flat, 10, 0), ContractError);
}

TEST(Normalize, HandValues) {
  PointCloud pc;
  pc.positions = {{0, 0, 0}, {2, 0, 0}};
  const PointCloud n = normalize_unit_sphere(pc);
  EXPECT_EQ(n.positions[0], (Vec3{-1, 0, 0}));
  EXPECT_EQ(n.positions[1], (Vec3{1, 0, 0}));
  PointCloud one;
  one.positions = {{3, -4, 5}};
  EXPECT_EQ(normalize_unit_sphere(one).positions[0], (Vec3{0, 0, 0}));
}

TEST(Normalize, CenteredUnitAndIdempotent) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    PointCloud pc = random_cloud(50, rng);
    for (auto& p : pc.positions) p[0] = p[0] * 7 + 3;
    const PointCloud n = normalize_unit_sphere(pc);
    const Vec3 c = centroid(n.positions);
    for (double v : c) EXPECT_NEAR(v, 0.0, 1e-9);
    double mx = 0;
    for (const auto& p : n.positions) mx = std::max(mx, dist(p, {0, 0, 0}));
    EXPECT_NEAR(mx, 1.0, 1e-9);
    const PointCloud again = normalize_unit_sphere(n);
    for (std::size_t i = 0; i < n.size(); ++i) EXPECT_LT(dist(again.positions[i], n.positions[i]), 1e-9);
  }
}

TEST(PointCloudValidate, Rejections) {
  PointCloud empty;
  EXPECT_THROW(empty.validate(), ContractError);
  PointCloud nan;
  nan.positions = {{0, std::nan(""), 0}};
  EXPECT_THROW(nan.validate(), ContractError);
  PointCloud short_labels;
  short_labels.positions = {{0, 0, 0}, {1, 0, 0}};
  short_labels.part_labels = std::vector<std::uint32_t>{0};
  EXPECT_THROW(short_labels.validate(), ContractError);
}

TEST(Augment, RotationIsIsometry) {
  std::mt19937_64 rng(3);
  const PointCloud pc = random_cloud(40, rng);
  const std::vector<Augmentation> ops{Augmentation::rotate};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PointCloud r = augment(pc, ops, seed);
    for (std::size_t i = 0; i < pc.size(); ++i) {
      EXPECT_NEAR(r.positions[i][2], pc.positions[i][2], 1e-12);  // gravity axis untouched
      for (std::size_t j = i + 1; j < pc.size(); ++j) {
        EXPECT_NEAR(dist(r.positions[i], r.positions[j]), dist(pc.positions[i], pc.positions[j]), 1e-9);
      }
    }
  }
}

TEST(Augment, TranslationPreservesDifferences) {
  std::mt19937_64 rng(4);
  const PointCloud pc = random_cloud(20, rng);
  const PointCloud t = augment(pc, std::vector<Augmentation>{Augmentation::translate}, 9);
  const Vec3 shift{t.positions[0][0] - pc.positions[0][0], t.positions[0][1] - pc.positions[0][1],
                   t.positions[0][2] - pc.positions[0][2]};
  for (double s : shift) EXPECT_LE(std::abs(s), 0.1);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(t.positions[i][k] - pc.positions[i][k], shift[k], 1e-15);
  }
}

TEST(Augment, JitterClipBound) {
  std::mt19937_64 rng(5);
  const PointCloud pc = random_cloud(500, rng);
  AugmentParams big;
  big.jitter_sigma = 1.0;  // nearly every draw hits the clip
  const PointCloud j = augment(pc, std::vector<Augmentation>{Augmentation::jitter}, 1, big);
  double worst = 0;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(j.positions[i][k] - pc.positions[i][k]));
  }
  EXPECT_LE(worst, 0.05 + 1e-12);
  EXPECT_GT(worst, 0.049);
}

TEST(Augment, AnisotropicScaleBounds) {
  std::mt19937_64 rng(6);
  PointCloud pc = random_cloud(30, rng);
  for (auto& p : pc.positions) {
    for (auto& v : p) v = 0.5 + std::abs(v);  // keep away from zero for ratios
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PointCloud s = augment(pc, std::vector<Augmentation>{Augmentation::aniso_scale}, seed);
    for (int k = 0; k < 3; ++k) {
      const double ratio = s.positions[0][k] / pc.positions[0][k];
      EXPECT_GE(ratio, 2.0 / 3.0 - 1e-12);
      EXPECT_LE(ratio, 1.5 + 1e-12);
      for (std::size_t i = 1; i < pc.size(); ++i) EXPECT_NEAR(s.positions[i][k] / pc.positions[i][k], ratio, 1e-12);
    }
  }
}

TEST(Augment, PureInSeedAndKeepsLabels) {
  std::mt19937_64 rng(7);
  PointCloud pc = random_cloud(16, rng);
  pc.class_label = 3;
  pc.part_labels = std::vector<std::uint32_t>(16, 1);
  const auto all = all_augmentations();
  EXPECT_EQ(augment(pc, all, 42), augment(pc, all, 42));
  EXPECT_NE(augment(pc, all, 42), augment(pc, all, 43));
  const PointCloud a = augment(pc, all, 42);
  EXPECT_EQ(a.class_label, pc.class_label);
  EXPECT_EQ(a.part_labels, pc.part_labels);
  EXPECT_EQ(augment(pc, std::vector<Augmentation>{}, 1), pc);
}

TEST(Augment, NamesRoundTrip) {
  for (auto a : all_augmentations()) EXPECT_EQ(parse_augmentation(to_string(a)), a);
  EXPECT_FALSE(parse_augmentation("shear").has_value());
}

TEST(Synthetic, SpherePrimitiveOnSurface) {
  std::mt19937_64 rng(8);
  for (const auto& p : sample_primitive(Primitive::sphere, 300, rng)) EXPECT_NEAR(dist(p, {0, 0, 0}), 1.0, 1e-6);
  for (const auto& p : sample_primitive(Primitive::plane, 300, rng)) EXPECT_EQ(p[2], 0.0);
  for (const auto& p : sample_primitive(Primitive::cube, 300, rng)) {
    const double m = std::max({std::abs(p[0]), std::abs(p[1]), std::abs(p[2])});
    EXPECT_NEAR(m, 1.0, 1e-12);
  }
}

TEST(Synthetic, ClassificationBalancedAndNormalized) {
  const Dataset d = gen_synthetic(Task::classification, 32, 128, 1);
  ASSERT_EQ(d.size(), 32u);
  std::map<std::uint32_t, int> hist;
  for (const auto& pc : d) {
    ASSERT_TRUE(pc.class_label.has_value());
    ++hist[*pc.class_label];
    EXPECT_EQ(pc.size(), 128u);
    for (double v : centroid(pc.positions)) EXPECT_NEAR(v, 0.0, 1e-9);
  }
  EXPECT_EQ(hist.size(), 4u);
  for (const auto& [c, n] : hist) EXPECT_EQ(n, 8);
}

TEST(Synthetic, SegmentationPartsBalanced) {
  const Dataset d = gen_synthetic(Task::segmentation, 10, 200, 2);
  for (const auto& pc : d) {
    ASSERT_TRUE(pc.part_labels.has_value());
    std::size_t ones = 0;
    for (auto l : *pc.part_labels) {
      EXPECT_LT(l, kSyntheticParts);
      ones += l;
    }
    EXPECT_GE(ones, 20u);
    EXPECT_GE(200 - ones, 20u);
    EXPECT_LT(*pc.class_label, kSyntheticCategories);
  }
}

TEST(Synthetic, SeedsChangeCloudsNotHistogram) {
  const Dataset a = gen_synthetic(Task::classification, 12, 64, 1);
  const Dataset b = gen_synthetic(Task::classification, 12, 64, 2);
  EXPECT_EQ(a, gen_synthetic(Task::classification, 12, 64, 1));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].class_label, b[i].class_label);
    EXPECT_NE(a[i].positions, b[i].positions);
  }
  EXPECT_THROW(gen_synthetic(Task::classification, 1, 15, 0), ContractError);
}

TEST(Pcb, RoundTripBitExact) {
  Dataset d = gen_synthetic(Task::segmentation, 3, 20, 4);
  d[1].part_labels.reset();
  d[2].class_label.reset();
  for (auto& pc : d) {
    for (auto& p : pc.positions) {
      for (auto& v : p) {
        // volatile keeps GCC 11 -O3 from dropping the narrowing in the loop tail
        volatile float f = static_cast<float>(v);
        v = f;
      }
    }
  }
  const auto path = std::filesystem::temp_directory_path() / "pcattn_pcio_roundtrip.pcb";
  write_pcb(path, d);
  EXPECT_EQ(read_pcb(path), d);
  std::filesystem::remove(path);
}

TEST(Pcb, EmptyDataset) {
  const std::string bytes = encode_pcb({});
  EXPECT_EQ(bytes.size(), 8u);
  EXPECT_TRUE(decode_pcb(bytes).empty());
}

TEST(Pcb, FormatErrorsCarryOffsets) {
  const std::string good = encode_pcb(gen_synthetic(Task::segmentation, 2, 16, 1));
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  try {
    decode_pcb(bad_magic);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  try {
    decode_pcb(good.substr(0, good.size() - 3));
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_GT(e.offset(), 8u);
  }
  std::string bad_count = good;
  bad_count[4] = 5;  // claims five records
  EXPECT_THROW(decode_pcb(bad_count), FormatError);
  EXPECT_THROW(decode_pcb(good + "x"), FormatError);
  EXPECT_THROW(read_pcb("/nonexistent/dir/file.pcb"), IoError);
}
