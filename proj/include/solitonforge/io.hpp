#pragma once

#include "solitonforge/conserved.hpp"
#include "solitonforge/core.hpp"
#include "solitonforge/evolution.hpp"
#include "solitonforge/scattering.hpp"
#include "solitonforge/twosoliton.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>

namespace sf {

using json = nlohmann::ordered_json;

/// %.17g, the text form used by every CSV writer.
std::string format_real(double v);

/// CSV with header x,re,im.
void write_grid_csv(std::ostream& os, const GridField& u);
/// Inverse of write_grid_csv; the x column must be uniformly spaced.
GridField read_grid_csv(std::istream& is);

GridField load_grid_csv(const std::string& path);
void save_grid_csv(const std::string& path, const GridField& u);

json to_json(cd z);
cd complex_from_json(const json& j);

/// {"N":..., "s":[[re,im],...], "beta":[...]}
json to_json(const PhasePoint& p);
PhasePoint phase_point_from_json(const json& j);

/// {"count":..., "roots":[[re,im],...], "s":[[re,im],...], "region":[x0,x1,y0,y1]}
json to_json(const SpectrumReport& r);
json to_json(const EnergyReport& r);
json to_json(const EffectiveParams& e);
json to_json(const BumpReport& b);
json to_json(const TwoSolParams& p);

/// Header t,x_plus,x_minus,amp_plus,amp_minus,regime.
void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryPoint>& tr);
/// Header t,dist,residual_mass,spectrum_drift,flag.
void write_stability_csv(std::ostream& os, const StabilityReport& r);

/// {"error": kind, "message": what}
json error_json(const Error& e);

}  // namespace sf
