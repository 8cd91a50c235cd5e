#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace owcsim {

struct Vec3
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// Optical front-end parameters for the LOS link model. Angles in degrees.
struct LambertianParams
{
    double detector_area = 1e-4;            // A_r, m^2
    double half_power_semiangle_deg = 60.0; // source semi-angle at half power
    double filter_gain = 1.0;               // T_s, constant over incidence
    double refractive_index = 1.5;          // concentrator n_r
    double tx_power = 1.0;                  // W, only the preamble estimator uses it

    /// Throws ConfigError listing every out-of-range field.
    void validate() const;

    friend bool operator==(const LambertianParams&, const LambertianParams&) = default;
};

/**
 * Static description of the room: a square device grid on the floor and a
 * square AP grid on the ceiling, both centered on the room plan.
 *
 * The AP pitch defaults to tx_pitch * floor(room_width / (tx_pitch * rx_per_side)),
 * which keeps every AP over the center of a device-grid square.
 */
struct Scenario
{
    double room_width = 50.0;
    double room_depth = 50.0;
    double height = 3.0;
    int tx_per_side = 26;
    double tx_pitch = 2.0;
    int rx_per_side = 1;
    std::optional<double> rx_pitch;
    LambertianParams lambertian;
    double fov_deg = 89.0;

    int device_count() const noexcept { return tx_per_side * tx_per_side; }
    int receiver_count() const noexcept { return rx_per_side * rx_per_side; }
    double effective_rx_pitch() const;

    Scenario with_fov(double fov) const
    {
        Scenario s = *this;
        s.fov_deg = fov;
        return s;
    }

    /// Throws ConfigError listing every violated constraint, including an AP
    /// grid that cannot sit on device-square centers.
    void validate() const;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Row-major N x M matrix of optical gains (device rows, AP columns).
class GainMatrix
{
public:
    GainMatrix() = default;
    GainMatrix(std::size_t devices, std::size_t receivers)
        : devices_(devices), receivers_(receivers), data_(devices * receivers, 0.0)
    {
    }

    std::size_t devices() const noexcept { return devices_; }
    std::size_t receivers() const noexcept { return receivers_; }

    double operator()(std::size_t i, std::size_t j) const noexcept
    {
        return data_[i * receivers_ + j];
    }
    double& operator()(std::size_t i, std::size_t j) noexcept
    {
        return data_[i * receivers_ + j];
    }

    std::span<const double> row(std::size_t i) const noexcept
    {
        return {data_.data() + i * receivers_, receivers_};
    }

    double total() const noexcept;

    friend bool operator==(const GainMatrix&, const GainMatrix&) = default;

private:
    std::size_t devices_ = 0;
    std::size_t receivers_ = 0;
    std::vector<double> data_;
};

/// Gain matrix plus the per-AP device sets U_j it induces.
struct Coverage
{
    GainMatrix gains;
    std::vector<double> incidence_deg;          // N x M, row-major
    std::vector<std::vector<int>> devices_of;   // U_j, ascending device index
    std::vector<int> uncovered;                 // devices in no U_j

    double incidence(std::size_t i, std::size_t j) const noexcept
    {
        return incidence_deg[i * gains.receivers() + j];
    }
    std::size_t covered_links() const noexcept;
};

struct GridPositions
{
    std::vector<Vec3> tx;  // floor plane, z = 0
    std::vector<Vec3> rx;  // ceiling plane, z = height
};

/// Tolerance (radians) applied to every incidence-angle vs. FOV comparison.
inline constexpr double kFovToleranceRad = 1e-9;

/// m = -ln 2 / ln cos(semi-angle). Throws std::domain_error outside (0, 90).
double lambertian_order(double half_power_semiangle_deg);

/// n_r^2 / sin^2(fov) inside the FOV, zero outside.
double concentrator_gain(double incidence_deg, double fov_deg, double refractive_index);

/// Incidence angle at a downward-facing receiver, in degrees.
double incidence_angle_deg(const Vec3& tx, const Vec3& rx);

/**
 * LOS gain between an upward-facing transmitter and a downward-facing
 * receiver:
 *
 *   h = A_r (m+1) / (2 pi d^2) cos^m(phi) g(psi) T_s cos(psi)   if psi <= fov
 *
 * and zero otherwise. Throws std::domain_error when the points coincide.
 */
double lambertian_gain(const Vec3& tx, const Vec3& rx,
                       const LambertianParams& params, double fov_deg);

GridPositions grid_positions(const Scenario& scenario);

Coverage coverage_sets(const Scenario& scenario);

}  // namespace owcsim
