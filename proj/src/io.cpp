#include "pevo/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace pevo {

using ordered_json = nlohmann::ordered_json;

namespace {
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

void write_norms_csv(const std::string& path, const Grid& g, const Trajectory& v, double s,
                     double sigma, double h, const EnergyAudit* audit) {
  std::ofstream f(path);
  require(f.good(), "write_norms_csv: cannot open " + path);
  f << "t,norm0,norm_s,norm_s_minus_sigma,bound_RHS,margin\n";
  for (int m = 0; m < v.size(); ++m) {
    double n0 = g.l2_norm(v.frames[m]);
    double ns = g.sobolev_norm(v.frames[m], s, h);
    double nss = g.sobolev_norm(v.frames[m], s - sigma, h);
    double rhs = 0.0, margin = 0.0;
    if (audit && m < static_cast<int>(audit->rhs.size())) {
      rhs = audit->rhs[m];
      margin = (audit->lhs[m] > 1e-300) ? rhs / audit->lhs[m] : 1e9;
    }
    f << fmt(v.times[m]) << ',' << fmt(n0) << ',' << fmt(ns) << ',' << fmt(nss) << ',' << fmt(rhs)
      << ',' << fmt(margin) << "\n";
  }
}

void write_frames_bin(const std::string& path, const Trajectory& v) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), "write_frames_bin: cannot open " + path);
  f.write("PEVO", 4);
  std::uint32_t version = 1, n = v.empty() ? 0 : static_cast<std::uint32_t>(v.frames[0].size()),
                count = static_cast<std::uint32_t>(v.size());
  f.write(reinterpret_cast<const char*>(&version), 4);
  f.write(reinterpret_cast<const char*>(&n), 4);
  f.write(reinterpret_cast<const char*>(&count), 4);
  for (int m = 0; m < v.size(); ++m) {
    double t = v.times[m];
    f.write(reinterpret_cast<const char*>(&t), 8);
    f.write(reinterpret_cast<const char*>(v.frames[m].data()), 16l * n);
  }
}

Trajectory read_frames_bin(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), "read_frames_bin: cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  require(std::memcmp(magic, "PEVO", 4) == 0, "read_frames_bin: bad magic");
  std::uint32_t version = 0, n = 0, count = 0;
  f.read(reinterpret_cast<char*>(&version), 4);
  f.read(reinterpret_cast<char*>(&n), 4);
  f.read(reinterpret_cast<char*>(&count), 4);
  require(version == 1, "read_frames_bin: unsupported version");
  Trajectory tr;
  for (std::uint32_t m = 0; m < count; ++m) {
    double t;
    f.read(reinterpret_cast<char*>(&t), 8);
    VecC fr(n);
    f.read(reinterpret_cast<char*>(fr.data()), 16l * n);
    require(f.good(), "read_frames_bin: truncated file");
    tr.times.push_back(t);
    tr.frames.push_back(std::move(fr));
  }
  return tr;
}

std::string decay_report_json(const DecayReport& rep) {
  ordered_json j;
  j["pass"] = rep.pass;
  j["conditions"] = ordered_json::array();
  for (const auto& c : rep.conditions) {
    ordered_json e;
    e["name"] = c.name;
    e["pass"] = c.pass;
    e["worst_ratio"] = c.worst_ratio;
    e["threshold"] = c.threshold;
    e["fitted_constant"] = c.fitted_constant;
    e["witness"] = {{"t", c.t}, {"x", c.x}, {"w_re", c.w.real()}, {"w_im", c.w.imag()},
                    {"beta", c.beta}, {"gamma_order", c.gamma_order}, {"j", c.j}};
    j["conditions"].push_back(e);
  }
  return j.dump(2);
}

std::string pack_report_json(const TransformPack& pack, const TuneReport* tune) {
  ordered_json j;
  j["p"] = pack.p;
  j["M"] = pack.M;
  j["h"] = pack.h;
  j["neumann_order"] = pack.neumann_order;
  j["neumann_norm"] = pack.neumann_norm;
  j["neumann_tail"] = pack.neumann_tail();
  j["delta"] = pack.delta;
  j["C_fit"] = pack.C_fit;
  j["sigma"] = pack.sigma();
  j["certified"] = pack.certified();
  if (tune) {
    ordered_json t;
    t["success"] = tune->success;
    t["budget"] = tune->budget;
    t["gamma_bar"] = tune->gamma_bar;
    t["u_norm_pow"] = tune->u_norm_pow;
    t["final_defect"] = tune->final_defect;
    t["levels"] = ordered_json::array();
    for (const auto& l : tune->levels)
      t["levels"].push_back({{"k", l.k},
                             {"M", l.M},
                             {"defect", l.defect},
                             {"doublings", l.doublings},
                             {"paper_floor", l.paper_floor}});
    if (!tune->failure.empty()) t["failure"] = tune->failure;
    j["tune"] = t;
  }
  return j.dump(2);
}

std::string newton_report_json(const NewtonReport& rep) {
  ordered_json j;
  j["converged"] = rep.converged;
  j["iterations"] = rep.iterations;
  j["residuals"] = rep.residuals;
  j["contraction"] = rep.contraction;
  j["final_pde_residual"] = rep.final_pde_residual;
  j["certified_pde_residual"] = rep.certified_pde_residual;
  j["certified_interval"] = {rep.certified_from, rep.certified_to};
  j["checked_interval"] = {rep.checked_from, rep.checked_to};
  j["target_closeness"] = rep.target_closeness;
  j["stop_reason"] = rep.stop_reason;
  return j.dump(2);
}

std::string energy_audit_json(const EnergyAudit& audit) {
  ordered_json j;
  j["sigma"] = audit.sigma;
  j["exponent_proxy"] = audit.exponent_proxy;
  j["C_fit"] = audit.C_fit;
  j["margin_estimate"] = audit.margin_estimate;
  j["K_gronwall"] = audit.K_gronwall;
  j["margin_gronwall"] = audit.margin_gronwall;
  j["pass"] = audit.pass;
  return j.dump(2);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  require(f.good(), "write_text_file: cannot open " + path);
  f << content;
  if (!content.empty() && content.back() != '\n') f << "\n";
}

}  // namespace pevo
