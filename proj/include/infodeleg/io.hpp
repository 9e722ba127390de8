#pragma once

#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "infodeleg/discrete_oracle.hpp"
#include "infodeleg/distributions.hpp"
#include "infodeleg/experiments.hpp"
#include "infodeleg/ic_verification.hpp"

namespace infodeleg {

// 12 significant digits: enough to round-trip the 1e-9 tolerances.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Rounded the same way for JSON reports.
inline double rounded(double v) { return std::stod(fmt(v)); }

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void row(const std::vector<double>& values) {
    std::string line;
    for (std::size_t i = 0; i < values.size(); ++i) line += (i ? "," : "") + fmt(values[i]);
    rows_.push_back(std::move(line));
  }
  void raw(std::string line) { rows_.push_back(std::move(line)); }

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + header_[i];
    out += '\n';
    for (const auto& r : rows_) out += r + '\n';
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::string> rows_;
};

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << contents;
}

inline nlohmann::ordered_json to_json(const DoubleCensorship& dc) {
  return {{"s", rounded(dc.s)}, {"t", rounded(dc.t)}, {"x", rounded(dc.x)}, {"y", rounded(dc.y)}};
}

inline nlohmann::ordered_json to_json(const Experiment& e) {
  auto segs = nlohmann::ordered_json::array();
  for (const auto& seg : e.segments()) {
    if (const auto* a = std::get_if<Atom>(&seg)) {
      segs.push_back({{"atom", {{"location", rounded(a->location)}, {"mass", rounded(a->mass)}}}});
    } else {
      const auto& fp = std::get<FollowsPrior>(seg);
      segs.push_back({{"follows_prior", {{"a", rounded(fp.a)}, {"b", rounded(fp.b)}}}});
    }
  }
  return {{"segments", segs}, {"prior", e.prior().distribution().name()}};
}

inline nlohmann::ordered_json to_json(const AssumptionReport& r) {
  return {{"s_shape_ok", r.s_shape_ok},
          {"informativeness_ok", r.informativeness_ok},
          {"r0", rounded(r.r0)},
          {"mu", rounded(r.mu)},
          {"margin", rounded(r.margin)}};
}

inline nlohmann::ordered_json to_json(const CertificateReport& r) {
  return {{"convex_ok", r.convex_ok},
          {"dominates_ok", r.dominates_ok},
          {"support_contact_ok", r.support_contact_ok},
          {"integral_ok", r.integral_ok},
          {"max_violations",
           {{"convexity", rounded(r.max_violations.convexity)},
            {"domination", rounded(r.max_violations.domination)},
            {"contact", rounded(r.max_violations.contact)},
            {"integral", rounded(r.max_violations.integral)}}}};
}

inline std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

// (m, I_H, I_delta_mu, I_F) samples for each experiment given.
inline std::string icdf_csv(const PriorDistribution& prior, const std::vector<const Experiment*>& exps,
                            const std::vector<std::string>& names, std::size_t points = 513) {
  std::vector<std::string> header{"m", "I_H", "I_delta_mu"};
  for (const auto& n : names) header.push_back("I_" + n);
  CsvTable t(header);
  const auto point = Experiment::uninformative(prior);
  for (double m : linspace(0.0, 1.0, points)) {
    std::vector<double> row{m, prior.integrated_cdf(m), point.icdf(m)};
    for (const auto* e : exps) row.push_back(e->icdf(m));
    t.row(row);
  }
  return t.str();
}

// (m, G, p) samples of a certificate.
inline std::string certificate_csv(const PriceFunction& p, std::size_t points = 513) {
  CsvTable t({"m", "G", "p"});
  for (double m : linspace(0.0, 1.0, points)) t.row({m, p.outside().cdf(m), p(m)});
  return t.str();
}

inline std::string instance_csv(const DiscreteInstance& inst) {
  CsvTable t({"m", "prior_mass", "payoff", "designer"});
  for (std::size_t i = 0; i < inst.size(); ++i) {
    t.row({inst.grid[i], inst.prior_mass[i], inst.payoff[i], inst.designer.empty() ? 0.0 : inst.designer[i]});
  }
  return t.str();
}

// Row i, column j: mass of state i sent to posterior j.
inline std::string plan_csv(const TransportPlan& plan) {
  std::vector<std::string> header{"state"};
  for (std::size_t j = 0; j < plan.n; ++j) header.push_back("q" + std::to_string(j));
  CsvTable t(header);
  for (std::size_t i = 0; i < plan.n; ++i) {
    std::vector<double> row{static_cast<double>(i)};
    for (std::size_t j = 0; j < plan.n; ++j) row.push_back(plan(i, j));
    t.row(row);
  }
  return t.str();
}

inline std::string posterior_csv(const DiscreteInstance& inst, const std::vector<double>& mass) {
  CsvTable t({"m", "mass"});
  for (std::size_t i = 0; i < inst.size(); ++i) t.row({inst.grid[i], mass[i]});
  return t.str();
}

}  // namespace infodeleg
