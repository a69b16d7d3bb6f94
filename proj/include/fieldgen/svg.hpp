#pragma once

#include <string>
#include <vector>

#include "fieldgen/fitting.hpp"
#include "fieldgen/io.hpp"

namespace fieldgen {

/// Deterministic SVG emission: fixed canvas, fixed ordering, fixed
/// number formatting, no timestamps. Identical inputs produce
/// byte-identical files.

/// One generalization-curve panel (mean +/- SEM vs angular offset).
/// Multiple curves overlay with distinct colors.
void emit_curve_panel(const std::vector<GeneralizationCurve>& curves,
                      const std::string& title, const std::string& path);

/// Bar panel of asymmetries per anchor direction.
void emit_asymmetry_panel(const std::vector<AsymmetryRow>& rows,
                          const std::string& title, const std::string& path);

/// Polar plot of fitted representations (estimated gain fraction vs
/// reach direction), one trace per group.
void emit_representation_polar(const FitResult& fit, const std::string& title,
                               const std::string& path);

/// Baseline adaptation indices per direction.
void emit_baseline_panel(const std::vector<AdaptationIndex>& indices,
                         const std::string& title, const std::string& path);

}  // namespace fieldgen
