#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdvi/problems.hpp"
#include "mdvi/solver_types.hpp"

namespace mdvi {

/// Raised when a problem-spec document does not match the schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline std::int64_t get_int(const nlohmann::json& j, const char* key, std::int64_t fallback,
                            std::int64_t min_value) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw SchemaError(std::string("field '") + key + "' must be an integer");
  const auto out = v.get<std::int64_t>();
  if (out < min_value)
    throw SchemaError(std::string("field '") + key + "' must be >= " + std::to_string(min_value));
  return out;
}

inline double get_double(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) throw SchemaError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

inline Vector get_vector(const nlohmann::json& v, const char* what, Eigen::Index expected) {
  if (!v.is_array()) throw SchemaError(std::string(what) + " must be an array");
  if (expected >= 0 && static_cast<Eigen::Index>(v.size()) != expected)
    throw SchemaError(std::string(what) + " must have " + std::to_string(expected) + " entries");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw SchemaError(std::string(what) + " entries must be numbers");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

inline Matrix get_matrix(const nlohmann::json& v, const char* what, Eigen::Index n) {
  if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != n)
    throw SchemaError(std::string(what) + " must be an n x n array");
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) out.row(i) = get_vector(v[static_cast<std::size_t>(i)], what, n);
  return out;
}

inline std::uint64_t get_seed(const nlohmann::json& j) {
  if (!j.contains("seed")) return 0;
  const auto& v = j.at("seed");
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw SchemaError("field 'seed' must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

}  // namespace detail

/// Resolves the HpHard offset: "zero", "uniform" (seeded U[0,1) entries) or
/// an explicit array.
inline Vector hphard_offset(const nlohmann::json& q, Eigen::Index n, std::uint64_t seed) {
  if (q.is_string()) {
    const auto s = q.get<std::string>();
    if (s == "zero") return Vector::Zero(n);
    if (s == "uniform") return uniform_vector(n, seed, "hphard/q");
    throw SchemaError("field 'q' must be \"zero\", \"uniform\" or an array");
  }
  return detail::get_vector(q, "q", n);
}

/// Builds a problem from a problem-spec document:
///   {"kind": "hphard"|"forsaken"|"custom", "n": int, "m": int, "seed": int,
///    "radius": float, ...kind-specific fields}
inline VIProblem<EuclideanBall> problem_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("problem spec must be a JSON object");
  const auto& kind_v = detail::require(j, "kind");
  if (!kind_v.is_string()) throw SchemaError("field 'kind' must be a string");
  const auto kind = kind_v.get<std::string>();

  if (kind == "hphard") {
    const auto n = detail::get_int(j, "n", -1, 1);
    if (n < 1) throw SchemaError("missing field 'n'");
    const auto m = detail::get_int(j, "m", 10, 1);
    const auto seed = detail::get_seed(j);
    const double radius = detail::get_double(j, "radius", 1.0);
    if (!(radius > 0.0)) throw SchemaError("field 'radius' must be positive");
    HpHardSpec spec{n, seed, hphard_offset(j.value("q", nlohmann::json("uniform")), n, seed), radius};
    return generate_hphard(spec, generate_linear_constraints({m, n, seed}));
  }

  if (kind == "forsaken") {
    const double radius = detail::get_double(j, "radius", kForsakenRadius);
    if (!(radius > 0.0)) throw SchemaError("field 'radius' must be positive");
    const Vector start = j.contains("start") ? detail::get_vector(j.at("start"), "start", 2)
                                            : Vector(Vector::Zero(2));
    try {
      return forsaken_problem(start, radius);
    } catch (const std::domain_error& e) {
      throw SchemaError(e.what());
    }
  }

  if (kind == "custom") {
    const auto n = detail::get_int(j, "n", -1, 1);
    if (n < 1) throw SchemaError("missing field 'n'");
    const double radius = detail::get_double(j, "radius", 1.0);
    if (!(radius > 0.0)) throw SchemaError("field 'radius' must be positive");
    const Vector center =
        j.contains("center") ? detail::get_vector(j.at("center"), "center", n) : Vector(Vector::Zero(n));
    const Vector start = j.contains("start") ? detail::get_vector(j.at("start"), "start", n) : center;

    const auto& op_j = detail::require(j, "operator");
    if (!op_j.is_object()) throw SchemaError("field 'operator' must be an object");
    auto k = std::make_shared<const Matrix>(detail::get_matrix(detail::require(op_j, "matrix"), "operator.matrix", n));
    auto c = std::make_shared<const Vector>(
        op_j.contains("offset") ? detail::get_vector(op_j.at("offset"), "operator.offset", n)
                                : Vector(Vector::Zero(n)));
    // Affine F over the ball: ||K x + c|| <= ||K||_2 (||center|| + r) + ||c||.
    const double default_bound = spectral_norm(*k) * (center.norm() + radius) + c->norm();
    const double bound = detail::get_double(op_j, "bound", default_bound);
    const double delta = detail::get_double(op_j, "delta", 0.0);
    if (!(bound > 0.0)) throw SchemaError("operator bound must be positive");
    if (delta < 0.0) throw SchemaError("operator delta must be nonnegative");
    OperatorSpec op{[k, c](const Vector& x) -> Vector { return (*k) * x + *c; }, bound, delta};

    ConstraintFamily constraints = inactive_constraint(n);
    if (j.contains("constraints")) {
      const auto& cs = j.at("constraints");
      if (!cs.is_array()) throw SchemaError("field 'constraints' must be an array");
      if (!cs.empty()) {
        Matrix a(static_cast<Eigen::Index>(cs.size()), n);
        Vector b(static_cast<Eigen::Index>(cs.size()));
        for (std::size_t i = 0; i < cs.size(); ++i) {
          if (!cs[i].is_object()) throw SchemaError("constraint entries must be objects");
          a.row(static_cast<Eigen::Index>(i)) = detail::get_vector(detail::require(cs[i], "a"), "constraint a", n);
          const auto& bv = detail::require(cs[i], "b");
          if (!bv.is_number()) throw SchemaError("constraint b must be a number");
          b[static_cast<Eigen::Index>(i)] = bv.get<double>();
        }
        constraints = linear_constraints(std::move(a), std::move(b));
      }
    }
    std::optional<Vector> witness;
    if (j.contains("witness")) witness = detail::get_vector(j.at("witness"), "witness", n);
    try {
      return {EuclideanBall(center, radius, start), std::move(op), std::move(constraints),
              std::move(witness)};
    } catch (const std::exception& e) {
      throw SchemaError(e.what());
    }
  }

  throw SchemaError("unknown problem kind '" + kind + "'");
}

/// One row of experiment output.
struct RunRecord {
  SolverConfig config;
  std::uint64_t iterations = 0;
  double wall_time_seconds = 0.0;
  std::uint64_t i_count = 0;
  std::uint64_t j_count = 0;
  std::optional<double> certified_bound;
  std::vector<double> feasibility;
  std::string termination;
};

inline RunRecord make_record(const SolverConfig& config, const RunResult& r, double wall_time) {
  return {config,      r.iterations,     wall_time, r.i_count, r.j_count, r.certified_bound,
          r.feasibility, std::string(to_string(r.termination))};
}

inline int criterion_number(Criterion c) {
  switch (c) {
    case Criterion::kOne: return 1;
    case Criterion::kTwo: return 2;
    case Criterion::kNone: return 0;
  }
  return 0;
}

inline nlohmann::ordered_json summary_json(const RunRecord& r) {
  nlohmann::ordered_json j;
  j["algorithm"] = to_int(r.config.algorithm);
  j["criterion"] = criterion_number(r.config.criterion);
  j["eps"] = r.config.epsilon;
  j["delta"] = r.config.delta;
  j["modified"] = r.config.many_constraints;
  j["iterations"] = r.iterations;
  j["I"] = r.i_count;
  j["J"] = r.j_count;
  j["estimate"] = r.certified_bound ? nlohmann::ordered_json(*r.certified_bound) : nlohmann::ordered_json(nullptr);
  j["feasibility"] = r.feasibility;
  j["termination"] = r.termination;
  j["wall_time_s"] = r.wall_time_seconds;
  return j;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// iter,step_type,g_value,norm_used,step_size[,x0,...] (coordinates when n <= 4)
inline void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace,
                            Eigen::Index dimension) {
  const bool coords = dimension <= kTraceCoordinateLimit;
  os << "iter,step_type,g_value,norm_used,step_size";
  if (coords)
    for (Eigen::Index i = 0; i < dimension; ++i) os << ",x" << i;
  os << '\n';
  for (const auto& t : trace) {
    os << t.iter << ',' << to_string(t.kind) << ',' << format_double(t.g_value) << ','
       << format_double(t.norm_used) << ',' << format_double(t.step_size);
    if (coords)
      for (Eigen::Index i = 0; i < dimension; ++i) os << ',' << format_double(t.x[i]);
    os << '\n';
  }
}

}  // namespace mdvi
