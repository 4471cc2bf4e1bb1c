#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "riesz1d/continuity.hpp"
#include "riesz1d/kernel.hpp"
#include "riesz1d/ladder.hpp"
#include "riesz1d/measure.hpp"
#include "riesz1d/mollify.hpp"
#include "riesz1d/regularity.hpp"
#include "riesz1d/solver.hpp"

namespace riesz {

// All numeric text output goes through one formatter so identical doubles
// always serialize identically.
std::string format_double(double v);  // printf %.17g

// JSON has no inf/nan literals; these tag them as strings instead of the
// default null so reports stay round-trippable.
nlohmann::json json_number(double v);
nlohmann::json json_array(const std::vector<double>& v);

// Densities travel as two-column CSV with header "x,f"; the grid must be
// uniform (checked to 1e-9 relative on read).  Signed samples are accepted
// and produce a signed density.
void write_density_csv(const std::string& path, const GridDensity& f);
GridDensity read_density_csv(const std::string& path);

// Particle positions: single column "x".
void write_particles_csv(const std::string& path, const ParticleSystem& p);
ParticleSystem read_particles_csv(const std::string& path);

// Potential profiles: "x,psi,err".
void write_potential_csv(const std::string& path,
                         const std::vector<double>& x,
                         const std::vector<double>& psi,
                         const std::vector<double>& err);

nlohmann::json to_json(const LambdaEstimate& v);
nlohmann::json to_json(const CertificateReport& v);
nlohmann::json to_json(const ConvergenceReport& v);
nlohmann::json to_json(const SideLimits& v);
nlohmann::json to_json(const JumpDiagnostics& v);
nlohmann::json to_json(const ELReport& v);
nlohmann::json to_json(const DerivativeBoundReport& v);
nlohmann::json to_json(const CommutationReport& v);
nlohmann::json to_json(const SecondDerivativeForms& v);
nlohmann::json to_json(const CancellationResult& v);
nlohmann::json to_json(const RearrangementResult& v);
nlohmann::json to_json(const SweepReport& v);
nlohmann::json to_json(const CriticalPointLadder& v);
nlohmann::json to_json(const ContradictionMargin& v);
nlohmann::json to_json(const ContinuityReport& v);

std::uint64_t fnv1a(const std::string& s);
std::string hex64(std::uint64_t v);

// One manifest per CLI run: enough to re-execute the command and to check
// that identical configurations hash identically.  Timestamps live outside
// the hashed configuration.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::json config;      // canonical (keys sorted by the json type)
  std::string config_hash;    // hex of fnv1a(config.dump())
  std::string version;
  std::string started_at, finished_at;  // UTC, ISO 8601
  std::vector<std::string> outputs;
};

void finalize_hash(RunManifest& m);
nlohmann::json to_json(const RunManifest& m);
void write_manifest(const std::string& path, const RunManifest& m);
RunManifest read_manifest(const std::string& path);

std::string iso_timestamp_now();

}  // namespace riesz
