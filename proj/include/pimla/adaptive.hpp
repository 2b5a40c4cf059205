#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pimla/error.hpp"
#include "pimla/graph_io.hpp"

namespace pimla {

enum class GraphLabel { regular, scale_free };

inline std::string to_string(GraphLabel l) { return l == GraphLabel::regular ? "regular" : "scale-free"; }

struct GraphClass {
    GraphLabel label = GraphLabel::regular;
    double threshold_density_pct = 20.0;
};

struct ClassifierConfig {
    /// Scale-free iff degree_std / avg_degree >= cv_cut.
    double cv_cut = 0.5;
    double regular_threshold_pct = 20.0;
    double scale_free_threshold_pct = 50.0;
    /// When set, graphs with a lower average degree are regular regardless of cv.
    std::optional<double> avg_degree_split;
    /// Replaces the class threshold when set.
    std::optional<double> threshold_override_pct;
};

inline double degree_cv(const GraphStats& s) {
    if (!(s.avg_degree > 0)) {
        throw DegenerateGraphError("average degree is zero");
    }
    return s.degree_std / s.avg_degree;
}

inline GraphClass classify(const GraphStats& stats, const ClassifierConfig& cfg = {}) {
    const double cv = degree_cv(stats);
    bool scale_free = cv >= cfg.cv_cut;
    if (cfg.avg_degree_split && stats.avg_degree < *cfg.avg_degree_split) {
        scale_free = false;
    }
    GraphClass c;
    c.label = scale_free ? GraphLabel::scale_free : GraphLabel::regular;
    c.threshold_density_pct = cfg.threshold_override_pct.value_or(scale_free ? cfg.scale_free_threshold_pct
                                                                             : cfg.regular_threshold_pct);
    return c;
}

enum class KernelMode { spmspv, spmv };

inline std::string to_string(KernelMode m) { return m == KernelMode::spmspv ? "spmspv" : "spmv"; }

/// SpMSpV until the input density first exceeds the threshold, SpMV afterwards.
struct SwitchState {
    KernelMode current = KernelMode::spmspv;
    std::optional<std::size_t> switched_at_iteration;

    friend bool operator==(const SwitchState&, const SwitchState&) = default;
};

inline SwitchState should_switch(SwitchState state, double x_density_pct, const GraphClass& cls,
                                 std::size_t iteration = 0) {
    if (!(x_density_pct >= 0.0 && x_density_pct <= 100.0)) {
        throw DimensionError("density " + std::to_string(x_density_pct) + " outside [0, 100]");
    }
    if (state.current == KernelMode::spmspv && x_density_pct > cls.threshold_density_pct) {
        state.current = KernelMode::spmv;
        state.switched_at_iteration = iteration;
    }
    return state;
}

struct LabeledStats {
    std::string name;
    GraphStats stats;
    GraphLabel label = GraphLabel::regular;
};

/// Reads `name,avg_degree,degree_std,label` rows; a first line starting with "name" is a header.
inline std::vector<LabeledStats> load_labeled_stats(std::istream& in) {
    std::vector<LabeledStats> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#' || (line_no == 1 && line.rfind("name", 0) == 0)) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) {
            cells.push_back(cell);
        }
        if (cells.size() != 4) {
            throw ParseError(line_no, "expected 4 comma-separated fields");
        }
        LabeledStats r;
        r.name = cells[0];
        try {
            r.stats.avg_degree = std::stod(cells[1]);
            r.stats.degree_std = std::stod(cells[2]);
        } catch (const std::exception&) {
            throw ParseError(line_no, "non-numeric degree statistic");
        }
        if (cells[3] == "regular") {
            r.label = GraphLabel::regular;
        } else if (cells[3] == "scale-free") {
            r.label = GraphLabel::scale_free;
        } else {
            throw ParseError(line_no, "label must be 'regular' or 'scale-free'");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

/**
 * Fits the cv cut that misclassifies the fewest rows. Candidate cuts are the
 * midpoints between consecutive distinct cv values; ties go to the cut
 * closest to the default 0.5.
 */
inline double fit_cv_cut(const std::vector<LabeledStats>& rows) {
    if (rows.empty()) {
        throw ConfigError("no labeled rows to fit");
    }
    std::vector<double> cvs;
    for (const auto& r : rows) {
        cvs.push_back(degree_cv(r.stats));
    }
    std::vector<double> sorted = cvs;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<double> candidates{sorted.front() - 1.0, sorted.back() + 1.0};
    for (std::size_t k = 1; k < sorted.size(); ++k) {
        candidates.push_back((sorted[k - 1] + sorted[k]) / 2);
    }
    double best = 0.5;
    std::size_t best_err = SIZE_MAX;
    for (const double cut : candidates) {
        std::size_t err = 0;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const bool sf = cvs[k] >= cut;
            err += sf != (rows[k].label == GraphLabel::scale_free);
        }
        if (err < best_err || (err == best_err && std::abs(cut - 0.5) < std::abs(best - 0.5))) {
            best = cut;
            best_err = err;
        }
    }
    return best;
}

} // namespace pimla
