#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "augtrunc/families.hpp"
#include "augtrunc/forcing.hpp"
#include "augtrunc/truncation.hpp"

namespace augtrunc {

struct Grid {
    std::size_t n_min = 1;
    std::size_t n_max = 1;
    std::size_t step = 1;

    std::vector<std::size_t> levels() const;
};

struct SweepOutput {
    std::optional<std::string> csv;
    std::optional<std::string> json;
    bool timing = false;  ///< fill the ms column; off keeps the CSV reproducible
};

struct DiagnosisTolerances {
    std::size_t window = 4;
    double rtol = 1e-6;
};

struct SweepConfig {
    FamilyParams model;
    AugmentationScheme scheme = scheme::Censored{};
    ForcingFunction g;
    std::size_t anchor = 0;
    std::vector<std::size_t> probes;
    Grid grid;
    SweepOutput output;
    DiagnosisTolerances tolerances;
    bool expect_converged = false;

    /// Throws InvalidConfig on an empty grid or levels below the anchor/probes.
    void validate() const;
};

/// Missing values (the row failed before reaching them) are NaN.
struct SweepRow {
    std::size_t n = 0;
    bool ok = false;
    std::string error;
    double pi_g = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> f;    ///< f at the probes
    std::vector<double> tau;  ///< E_probe[tau_anchor]
    double sigma2 = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN();
    double ms = 0.0;
};

enum class Verdict { Converged, Diverging, Oscillating, Inconclusive };

std::string to_string(Verdict v);

struct ColumnDiagnosis {
    std::string column;
    Verdict verdict = Verdict::Inconclusive;
    std::optional<double> limit;  ///< Converged only
    std::string detail;
};

struct Diagnosis {
    Verdict verdict = Verdict::Inconclusive;
    std::size_t window = 4;
    std::vector<ColumnDiagnosis> columns;

    const ColumnDiagnosis* column(const std::string& name) const;
};

/// Classifies one column given per-row levels; NaN entries are skipped.
///   Converged:   the last W values lie pairwise within rtol (1 + |last|).
///   Oscillating: the even-n and odd-n subsequences each classify (Converged or
///                Diverging) but disagree in kind or limit.
///   Diverging:   |v| increases over the last W values and either doubles
///                across them or has non-shrinking increments.
ColumnDiagnosis diagnose_column(const std::string& name, const std::vector<std::size_t>& levels,
                                const std::vector<double>& values, const DiagnosisTolerances& tol = {});

/// Per-column verdicts for pi_g, each probe of f, and sigma2. The overall
/// verdict is Oscillating if any column oscillates, else Diverging if any
/// diverges, else Converged if all converge, else Inconclusive.
/// Throws TooFewRows with fewer than W rows.
Diagnosis diagnose(const std::vector<SweepRow>& rows, const std::vector<std::size_t>& probes,
                   const DiagnosisTolerances& tol = {});

struct SweepReport {
    std::string model;
    std::string scheme;
    std::string forcing;
    std::size_t anchor = 0;
    std::vector<std::size_t> probes;
    bool timing = false;
    std::vector<SweepRow> rows;
    Diagnosis diagnosis;
};

/// Rows are computed independently (in parallel when threads > 1) and
/// assembled in grid order. A failing level is recorded, not thrown.
SweepReport run_sweep(const SweepConfig& cfg, unsigned threads = 1);

/// Header n,pi_g,f_<probe>...,sigma2,residual,ms; values with 10 significant
/// digits, missing values empty.
std::string to_csv(const SweepReport& r);
/// Full-precision mirror of the CSV plus the diagnosis.
std::string to_json(const SweepReport& r);

}  // namespace augtrunc
