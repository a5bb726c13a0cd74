// Instance (de)serialization, trace CSV output, and the --gen mini-language.
//
// Instance JSON:
//   {
//     "n": 1, "L": 2, "A": 2, "K": 2,
//     "leader_utility": [...],            // flat, action-profile major, l fastest
//     "follower_utilities": [[[[...]]]],  // nested [i][l][a][k]
//     "distribution": {"kind": "general", "joint": [...]}
//                   | {"kind": "independent", "marginals": [[...], ...]}
//   }
//
// Trace CSV columns: run_id, round, region_index, expected_regret,
// cumulative_regret, realized_utility; rounds 1..T contiguous per run.

#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bsg/harness.hpp"
#include "bsg/types.hpp"

namespace bsg {

inline nlohmann::json instance_to_json(const GameInstance& game) {
  const PublicView& v = game.view();
  if (!v.leader_utility.is_dense())
    throw ValidationError("instance_to_json: evaluator-backed leader utility");

  nlohmann::json j;
  j["n"] = v.n;
  j["L"] = v.L;
  j["A"] = v.A;
  j["K"] = v.K;
  j["leader_utility"] = v.leader_utility.table();

  nlohmann::json fu = nlohmann::json::array();
  for (int i = 0; i < v.n; ++i) {
    nlohmann::json per_l = nlohmann::json::array();
    for (int l = 0; l < v.L; ++l) {
      nlohmann::json per_a = nlohmann::json::array();
      for (int a = 0; a < v.A; ++a) {
        nlohmann::json per_k = nlohmann::json::array();
        for (int k = 0; k < v.K; ++k) per_k.push_back(v.follower_u(i, l, a, k));
        per_a.push_back(std::move(per_k));
      }
      per_l.push_back(std::move(per_a));
    }
    fu.push_back(std::move(per_l));
  }
  j["follower_utilities"] = std::move(fu);

  const TypeDistribution& d = game.distribution();
  if (d.kind() == TypeDistribution::Kind::kGeneral)
    j["distribution"] = {{"kind", "general"}, {"joint", d.joint()}};
  else
    j["distribution"] = {{"kind", "independent"}, {"marginals", d.marginals()}};
  return j;
}

inline GameInstance instance_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n").get<int>();
    const int L = j.at("L").get<int>();
    const int A = j.at("A").get<int>();
    const int K = j.at("K").get<int>();

    PublicView view;
    view.n = n;
    view.L = L;
    view.A = A;
    view.K = K;
    view.leader_utility =
        LeaderUtility::dense(n, L, A, j.at("leader_utility").get<std::vector<double>>());

    const auto& fu = j.at("follower_utilities");
    view.follower_utilities.assign(static_cast<std::size_t>(n) * L * A * K, 0.0);
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < L; ++l)
        for (int a = 0; a < A; ++a)
          for (int k = 0; k < K; ++k)
            view.follower_utilities[static_cast<std::size_t>(((i * L + l) * A + a) * K + k)] =
                fu.at(i).at(l).at(a).at(k).get<double>();

    const auto& dj = j.at("distribution");
    const std::string kind = dj.at("kind").get<std::string>();
    TypeDistribution dist =
        kind == "general"
            ? TypeDistribution::general(n, K, dj.at("joint").get<std::vector<double>>())
        : kind == "independent"
            ? TypeDistribution::independent(
                  dj.at("marginals").get<std::vector<std::vector<double>>>())
            : throw ValidationError("instance_from_json: unknown distribution kind");
    return GameInstance(std::move(view), std::move(dist));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("instance_from_json: ") + e.what());
  }
}

inline void save_instance(const std::string& path, const GameInstance& game) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << instance_to_json(game).dump(2) << '\n';
}

inline GameInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid JSON in ") + path + ": " + e.what());
  }
  return instance_from_json(j);
}

// ---------------------------------------------------------------------------
// Trace CSV.

inline void write_trace_csv(std::ostream& out,
                            std::span<const RegretTrace> traces) {
  out << "run_id,round,region_index,expected_regret,cumulative_regret,realized_utility\n";
  char buf[128];
  for (const RegretTrace& trace : traces) {
    for (std::size_t r = 0; r < trace.rows.size(); ++r) {
      const TraceRow& row = trace.rows[r];
      std::snprintf(buf, sizeof(buf), "%d,%zu,%d,%.17g,%.17g,%.17g\n",
                    trace.run_id, r + 1, row.region_index, row.expected_regret,
                    row.cumulative_regret, row.realized_utility);
      out << buf;
    }
  }
}

// ---------------------------------------------------------------------------
// Generator mini-language. Grammar:
//
//   spec       := kind [ ':' kv (',' kv)* ]
//   kind       := 'hard-single' | 'hard-multi' | 'random' | 'dominant' | 'bench'
//   kv         := key '=' value
//
//   hard-single: c, eps, sigma (string over +-, length c)
//   hard-multi:  n, K, eps, sigma (length n*K/2)
//   random:      n, L, A, K, dist (general|independent), seed
//   dominant:    n, L, A, K
//   bench:       seed (optional; the frozen benchmark preset)

namespace detail {

inline std::map<std::string, std::string> parse_kv(const std::string& body) {
  std::map<std::string, std::string> kv;
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t next = body.find(',', pos);
    if (next == std::string::npos) next = body.size();
    const std::string item = body.substr(pos, next - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw ValidationError("generator spec: expected key=value, got '" + item + "'");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
    pos = next + 1;
  }
  return kv;
}

inline std::vector<int> parse_sigma(const std::string& s, int c) {
  if (static_cast<int>(s.size()) != c)
    throw ValidationError("generator spec: sigma must have length " + std::to_string(c));
  std::vector<int> sigma;
  for (char ch : s) {
    if (ch == '+') sigma.push_back(1);
    else if (ch == '-') sigma.push_back(-1);
    else throw ValidationError("generator spec: sigma must be over +-");
  }
  return sigma;
}

inline int kv_int(const std::map<std::string, std::string>& kv,
                  const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end())
    throw ValidationError("generator spec: missing key '" + key + "'");
  return std::stoi(it->second);
}

inline double kv_double(const std::map<std::string, std::string>& kv,
                        const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end())
    throw ValidationError("generator spec: missing key '" + key + "'");
  return std::stod(it->second);
}

inline const std::string& kv_str(const std::map<std::string, std::string>& kv,
                                 const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end())
    throw ValidationError("generator spec: missing key '" + key + "'");
  return it->second;
}

}  // namespace detail

inline GameInstance make_from_gen_spec(const std::string& spec) {
  const std::size_t colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const auto kv = detail::parse_kv(
      colon == std::string::npos ? "" : spec.substr(colon + 1));

  if (kind == "hard-single") {
    const int c = detail::kv_int(kv, "c");
    const auto sigma = detail::parse_sigma(detail::kv_str(kv, "sigma"), c);
    return gen_single_follower_hard(c, detail::kv_double(kv, "eps"), sigma);
  }
  if (kind == "hard-multi") {
    const int n = detail::kv_int(kv, "n");
    const int K = detail::kv_int(kv, "K");
    if ((n * K) % 2 != 0)
      throw ValidationError("hard-multi: n*K must be even");
    const auto sigma = detail::parse_sigma(detail::kv_str(kv, "sigma"), n * K / 2);
    return gen_multi_follower_hard(
        n, K, gen_class_c(n * K / 2, detail::kv_double(kv, "eps"), sigma));
  }
  if (kind == "random") {
    const auto it = kv.find("dist");
    const DistKind dk = (it != kv.end() && it->second == "general")
                            ? DistKind::kGeneral
                            : DistKind::kIndependent;
    if (it != kv.end() && it->second != "general" && it->second != "independent")
      throw ValidationError("random: dist must be general|independent");
    return gen_random_instance(
        detail::kv_int(kv, "n"), detail::kv_int(kv, "L"), detail::kv_int(kv, "A"),
        detail::kv_int(kv, "K"), dk,
        static_cast<std::uint64_t>(kv.contains("seed") ? detail::kv_int(kv, "seed") : 1));
  }
  if (kind == "dominant") {
    return gen_dominant_instance(detail::kv_int(kv, "n"), detail::kv_int(kv, "L"),
                                 detail::kv_int(kv, "A"), detail::kv_int(kv, "K"));
  }
  if (kind == "bench") {
    return make_bench_instance(
        kv.contains("seed") ? static_cast<std::uint64_t>(detail::kv_int(kv, "seed"))
                            : kBenchSeed);
  }
  throw ValidationError("unknown generator kind: " + kind);
}

}  // namespace bsg
