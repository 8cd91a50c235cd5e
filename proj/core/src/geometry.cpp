#include "owcsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "owcsim/error.hpp"

namespace owcsim {
namespace {

constexpr double kPi = std::numbers::pi;

double to_rad(double deg) { return deg * kPi / 180.0; }
double to_deg(double rad) { return rad * 180.0 / kPi; }

bool open_angle(double deg) { return std::isfinite(deg) && deg > 0.0 && deg < 90.0; }

bool within_fov(double incidence_rad, double fov_rad)
{
    return incidence_rad >= 0.0 && incidence_rad <= fov_rad + kFovToleranceRad;
}

// Coordinates of a centered 1-D grid.
std::vector<double> centered_axis(int count, double pitch)
{
    std::vector<double> axis(static_cast<std::size_t>(count));
    const double center = 0.5 * (count - 1);
    for (int i = 0; i < count; ++i) {
        axis[static_cast<std::size_t>(i)] = (i - center) * pitch;
    }
    return axis;
}

void collect_lambertian_issues(const LambertianParams& p, const std::string& prefix,
                               std::vector<ConfigIssue>& issues)
{
    if (!(std::isfinite(p.detector_area) && p.detector_area > 0.0)) {
        issues.push_back({prefix + "detector_area", "must be a positive finite area"});
    }
    if (!open_angle(p.half_power_semiangle_deg)) {
        issues.push_back({prefix + "half_power_semiangle_deg", "must lie in (0, 90) degrees"});
    }
    if (!(std::isfinite(p.filter_gain) && p.filter_gain >= 0.0)) {
        issues.push_back({prefix + "filter_gain", "must be finite and >= 0"});
    }
    if (!(std::isfinite(p.refractive_index) && p.refractive_index >= 1.0)) {
        issues.push_back({prefix + "refractive_index", "must be finite and >= 1"});
    }
    if (!(std::isfinite(p.tx_power) && p.tx_power > 0.0)) {
        issues.push_back({prefix + "tx_power", "must be a positive finite power"});
    }
}

}  // namespace

void LambertianParams::validate() const
{
    std::vector<ConfigIssue> issues;
    collect_lambertian_issues(*this, "lambertian.", issues);
    if (!issues.empty()) {
        throw ConfigError(std::move(issues));
    }
}

double Scenario::effective_rx_pitch() const
{
    if (rx_pitch) {
        return *rx_pitch;
    }
    return tx_pitch * std::floor(room_width / (tx_pitch * rx_per_side));
}

void Scenario::validate() const
{
    std::vector<ConfigIssue> issues;
    auto positive = [&](double v, const char* key) {
        if (!(std::isfinite(v) && v > 0.0)) {
            issues.push_back({key, "must be a positive finite length"});
        }
    };
    positive(room_width, "scenario.room.width");
    positive(room_depth, "scenario.room.depth");
    positive(height, "scenario.room.height");
    positive(tx_pitch, "scenario.devices.pitch");
    if (tx_per_side < 1) {
        issues.push_back({"scenario.devices.per_side", "must be >= 1"});
    }
    if (rx_per_side < 1) {
        issues.push_back({"scenario.access_points.per_side", "must be >= 1"});
    }
    if (!open_angle(fov_deg)) {
        issues.push_back({"scenario.fov_deg", "FOV must lie in (0, 90) degrees"});
    }
    collect_lambertian_issues(lambertian, "scenario.lambertian.", issues);

    if (issues.empty()) {
        const double extent = (tx_per_side - 1) * tx_pitch;
        if (extent > std::min(room_width, room_depth) + 1e-9) {
            issues.push_back({"scenario.devices", "device grid does not fit in the room"});
        }
        const double pitch = effective_rx_pitch();
        if (rx_per_side > 1 && !(std::isfinite(pitch) && pitch > 0.0)) {
            issues.push_back({"scenario.access_points.pitch",
                              "AP pitch must be positive (room too small for this AP grid)"});
        }
        else if (tx_per_side > 1) {
            // Every AP coordinate must be a device-square midpoint. A single
            // device has no squares; its APs are simply centered over it.
            const auto tx_axis = centered_axis(tx_per_side, tx_pitch);
            for (double a : centered_axis(rx_per_side, rx_per_side > 1 ? pitch : 0.0)) {
                const double k = (a - tx_axis.front()) / tx_pitch - 0.5;
                const double nearest = std::round(k);
                if (std::abs(k - nearest) > 1e-9 || nearest < 0.0
                    || nearest > tx_per_side - 2) {
                    issues.push_back({"scenario.access_points",
                                      "AP at coordinate " + std::to_string(a)
                                          + " m is not at the center of a device-grid square"});
                    break;
                }
            }
        }
    }
    if (!issues.empty()) {
        throw ConfigError(std::move(issues));
    }
}

double GainMatrix::total() const noexcept
{
    double sum = 0.0;
    for (double g : data_) {
        sum += g;
    }
    return sum;
}

std::size_t Coverage::covered_links() const noexcept
{
    std::size_t links = 0;
    for (const auto& u : devices_of) {
        links += u.size();
    }
    return links;
}

double lambertian_order(double half_power_semiangle_deg)
{
    if (!open_angle(half_power_semiangle_deg)) {
        throw std::domain_error("half-power semi-angle must lie in (0, 90) degrees");
    }
    return -std::numbers::ln2 / std::log(std::cos(to_rad(half_power_semiangle_deg)));
}

double concentrator_gain(double incidence_deg, double fov_deg, double refractive_index)
{
    if (!open_angle(fov_deg)) {
        throw std::domain_error("FOV must lie in (0, 90) degrees");
    }
    if (!(incidence_deg >= 0.0)) {
        throw std::domain_error("incidence angle must be non-negative");
    }
    if (!within_fov(to_rad(incidence_deg), to_rad(fov_deg))) {
        return 0.0;
    }
    const double s = std::sin(to_rad(fov_deg));
    return refractive_index * refractive_index / (s * s);
}

double incidence_angle_deg(const Vec3& tx, const Vec3& rx)
{
    const double dx = rx.x - tx.x;
    const double dy = rx.y - tx.y;
    const double dz = rx.z - tx.z;
    const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
    if (d == 0.0) {
        throw std::domain_error("transmitter and receiver positions coincide");
    }
    return to_deg(std::acos(std::clamp(dz / d, -1.0, 1.0)));
}

double lambertian_gain(const Vec3& tx, const Vec3& rx, const LambertianParams& params,
                       double fov_deg)
{
    if (!open_angle(fov_deg)) {
        throw std::domain_error("FOV must lie in (0, 90) degrees");
    }
    const double dx = rx.x - tx.x;
    const double dy = rx.y - tx.y;
    const double dz = rx.z - tx.z;
    const double d2 = dx * dx + dy * dy + dz * dz;
    if (d2 == 0.0) {
        throw std::domain_error("transmitter and receiver positions coincide");
    }
    const double d = std::sqrt(d2);
    // Vertical axes: tx looks up, rx looks down, so both angles share dz / d.
    const double cos_angle = dz / d;
    if (cos_angle <= 0.0) {
        return 0.0;
    }
    const double incidence = std::acos(std::min(cos_angle, 1.0));
    const double fov = to_rad(fov_deg);
    if (!within_fov(incidence, fov)) {
        return 0.0;
    }
    const double m = lambertian_order(params.half_power_semiangle_deg);
    const double s = std::sin(fov);
    const double g = params.refractive_index * params.refractive_index / (s * s);
    return params.detector_area * (m + 1.0) / (2.0 * kPi * d2) * std::pow(cos_angle, m) * g
           * params.filter_gain * cos_angle;
}

GridPositions grid_positions(const Scenario& scenario)
{
    scenario.validate();
    GridPositions out;
    const auto tx_axis = centered_axis(scenario.tx_per_side, scenario.tx_pitch);
    const auto rx_axis = centered_axis(
        scenario.rx_per_side, scenario.rx_per_side > 1 ? scenario.effective_rx_pitch() : 0.0);

    out.tx.reserve(tx_axis.size() * tx_axis.size());
    for (double y : tx_axis) {
        for (double x : tx_axis) {
            out.tx.push_back({x, y, 0.0});
        }
    }
    out.rx.reserve(rx_axis.size() * rx_axis.size());
    for (double y : rx_axis) {
        for (double x : rx_axis) {
            out.rx.push_back({x, y, scenario.height});
        }
    }
    return out;
}

Coverage coverage_sets(const Scenario& scenario)
{
    const GridPositions grid = grid_positions(scenario);
    const std::size_t n = grid.tx.size();
    const std::size_t m = grid.rx.size();

    Coverage cov;
    cov.gains = GainMatrix(n, m);
    cov.incidence_deg.resize(n * m);
    cov.devices_of.resize(m);

    for (std::size_t i = 0; i < n; ++i) {
        bool seen = false;
        for (std::size_t j = 0; j < m; ++j) {
            cov.incidence_deg[i * m + j] = incidence_angle_deg(grid.tx[i], grid.rx[j]);
            const double h = lambertian_gain(grid.tx[i], grid.rx[j], scenario.lambertian,
                                             scenario.fov_deg);
            cov.gains(i, j) = h;
            if (h > 0.0) {
                cov.devices_of[j].push_back(static_cast<int>(i));
                seen = true;
            }
        }
        if (!seen) {
            cov.uncovered.push_back(static_cast<int>(i));
        }
    }
    return cov;
}

}  // namespace owcsim
