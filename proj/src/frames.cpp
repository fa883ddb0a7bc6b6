// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <numeric>

#include "mhdc/errors.hpp"
#include "mhdc/geometry.hpp"

namespace mhdc {

namespace {

QVec3 q(long a, long b, long c, long den) {
  QVec3 v{mpq_class(a, den), mpq_class(b, den), mpq_class(c, den)};
  for (auto& x : v) x.canonicalize();
  return v;
}

QVec3 neg(const QVec3& v) { return QVec3{-v[0], -v[1], -v[2]}; }

Frame frame(QVec3 eta, QVec3 e1, QVec3 e2) { return Frame{eta, e1, e2}; }

// Appends the partner frames (-eta, eta2, eta1) after the generators.
void append_partners(std::vector<Frame>& fs) {
  const std::size_t m = fs.size();
  for (std::size_t i = 0; i < m; ++i) fs.push_back(frame(neg(fs[i].eta), fs[i].eta2, fs[i].eta1));
}

}  // namespace

std::string kind_name(FrameKind k) {
  switch (k) {
    case FrameKind::LambdaU: return "LambdaU";
    case FrameKind::LambdaB10: return "LambdaB10";
    case FrameKind::LambdaB16: return "LambdaB16";
  }
  return "unknown";
}

FrameSet builtin_lambda_B(int kind) {
  FrameSet fs;
  if (kind == 10) {
    fs.kind = FrameKind::LambdaB10;
    fs.frames = {
        frame(q(0, 0, 1, 1), q(1, 0, 0, 1), q(0, 1, 0, 1)),
        frame(q(0, 1, 0, 1), q(1, 0, 0, 1), q(0, 0, 1, 1)),
        frame(q(3, 4, 0, 5), q(-4, 3, 0, 5), q(0, 0, 1, 1)),
        frame(q(3, 0, 4, 5), q(-4, 0, 3, 5), q(0, 1, 0, 1)),
        frame(q(0, 3, 4, 5), q(0, -4, 3, 5), q(1, 0, 0, 1)),
    };
  } else if (kind == 16) {
    fs.kind = FrameKind::LambdaB16;
    fs.frames = {
        frame(q(1, 0, 0, 1), q(0, 1, 0, 1), q(0, 0, 1, 1)),
        frame(q(0, 0, -1, 1), q(0, 1, 0, 1), q(1, 0, 0, 1)),
        frame(q(0, 1, 0, 1), q(-1, 0, 0, 1), q(0, 0, 1, 1)),
        frame(q(2, 1, -2, 3), q(1, 2, 2, 3), q(2, -2, 1, 3)),
        frame(q(2, 2, 1, 3), q(-2, 1, 2, 3), q(1, -2, 2, 3)),
        frame(q(2, -2, -1, 3), q(2, 1, 2, 3), q(-1, -2, 2, 3)),
        frame(q(2, -1, 2, 3), q(-1, 2, 2, 3), q(-2, -2, 1, 3)),
        frame(q(1, 2, -2, 3), q(-2, 2, 1, 3), q(2, 1, 2, 3)),
    };
  } else {
    throw Error("builtin_lambda_B: kind must be 10 or 16");
  }
  append_partners(fs.frames);
  return fs;
}

FrameSet default_lambda_u() {
  FrameSet fs;
  fs.kind = FrameKind::LambdaU;
  fs.frames = {
      frame(q(2, 1, 2, 3), q(-1, -2, 2, 3), q(2, -2, -1, 3)),
      frame(q(1, 2, 2, 3), q(-2, 2, -1, 3), q(-2, -1, 2, 3)),
      frame(q(1, -2, 2, 3), q(-2, 1, 2, 3), q(-2, -2, -1, 3)),
      frame(q(2, -1, -2, 3), q(-2, -2, -1, 3), q(-1, 2, -2, 3)),
      frame(q(1, -2, -2, 3), q(2, -1, 2, 3), q(-2, -2, 1, 3)),
      frame(q(2, 2, -1, 3), q(-1, 2, 2, 3), q(2, -1, 2, 3)),
  };
  fs.seed = frame(q(0, 0, 1, 1), q(1, 0, 0, 1), q(0, 1, 0, 1));
  return fs;
}

long eta_denominator_lcm(const FrameSet& fs, bool include_seed) {
  long l = 1;
  auto take = [&l](const Frame& f) {
    for (const auto& x : f.eta) l = std::lcm(l, x.get_den().get_si());
  };
  for (const auto& f : fs.frames) take(f);
  if (include_seed && fs.seed) take(*fs.seed);
  return l;
}

namespace {

nlohmann::json vec_json(const QVec3& v) {
  return nlohmann::json::array({v[0].get_str(), v[1].get_str(), v[2].get_str()});
}

QVec3 vec_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("frame vector must have 3 entries");
  QVec3 v;
  for (int i = 0; i < 3; ++i) {
    v[i] = mpq_class(j[i].get<std::string>());
    v[i].canonicalize();
  }
  return v;
}

nlohmann::json frame_json(const Frame& f) {
  return nlohmann::json{{"eta", vec_json(f.eta)}, {"eta1", vec_json(f.eta1)}, {"eta2", vec_json(f.eta2)}};
}

Frame frame_from(const nlohmann::json& j) {
  return Frame{vec_from(j.at("eta")), vec_from(j.at("eta1")), vec_from(j.at("eta2"))};
}

}  // namespace

nlohmann::json frames_to_json(const FrameSet& fs) {
  nlohmann::json j;
  j["kind"] = kind_name(fs.kind);
  j["frames"] = nlohmann::json::array();
  for (const auto& f : fs.frames) j["frames"].push_back(frame_json(f));
  if (fs.seed) j["seed"] = frame_json(*fs.seed);
  return j;
}

FrameSet frames_from_json(const nlohmann::json& j) {
  FrameSet fs;
  const std::string k = j.at("kind").get<std::string>();
  if (k == "LambdaU") fs.kind = FrameKind::LambdaU;
  else if (k == "LambdaB10") fs.kind = FrameKind::LambdaB10;
  else if (k == "LambdaB16") fs.kind = FrameKind::LambdaB16;
  else throw Error("unknown frame kind " + k);
  for (const auto& f : j.at("frames")) fs.frames.push_back(frame_from(f));
  if (j.contains("seed")) fs.seed = frame_from(j.at("seed"));
  return fs;
}

}  // namespace mhdc
