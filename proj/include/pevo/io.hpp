#pragma once

#include <string>

#include "pevo/linear.hpp"
#include "pevo/semilinear.hpp"
#include "pevo/tuning.hpp"

namespace pevo {

/// norms.csv: t, ||v||_0, ||v||_s, ||v||_{s-sigma}, bound_RHS, margin.
void write_norms_csv(const std::string& path, const Grid& g, const Trajectory& v, double s,
                     double sigma, double h, const EnergyAudit* audit);

/// frames.bin: magic "PEVO", version u32, N u32, frame count u32, then per
/// frame t as float64 followed by 2N float64 (re,im interleaved), little-endian.
void write_frames_bin(const std::string& path, const Trajectory& v);
Trajectory read_frames_bin(const std::string& path);

std::string decay_report_json(const DecayReport& rep);
std::string pack_report_json(const TransformPack& pack, const TuneReport* tune);
std::string newton_report_json(const NewtonReport& rep);
std::string energy_audit_json(const EnergyAudit& audit);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace pevo
