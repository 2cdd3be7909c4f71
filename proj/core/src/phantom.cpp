#include "dihs/phantom.hpp"

#include <numbers>

namespace dihs {

void PhantomSpec::validate(std::size_t n_materials) const {
  require(image_side >= 1, "phantom: image_side must be >= 1");
  for (std::size_t k = 0; k < circles.size(); ++k) {
    const Circle& c = circles[k];
    const std::string where = "phantom circle " + std::to_string(k) + ": ";
    require(c.center_x >= 0.0 && c.center_x <= 1.0 && c.center_y >= 0.0 && c.center_y <= 1.0,
            where + "center outside the unit square");
    require(c.radius > 0.0 && std::isfinite(c.radius), where + "radius must be positive");
    require(c.concentration >= 0.0 && std::isfinite(c.concentration), where + "concentration must be >= 0");
    require(c.material < n_materials, where + "material index out of range");
  }
}

Vector render_phantom(const PhantomSpec& spec, std::size_t n_materials, std::size_t supersample) {
  spec.validate(n_materials);
  require(supersample >= 1, "phantom: supersample must be >= 1");
  const std::size_t side = spec.image_side, npix = side * side;
  const double n = static_cast<double>(side), q = static_cast<double>(supersample);
  Vector out(npix * n_materials, 0.0);
  for (const Circle& c : spec.circles) {
    const double cx = c.center_x * n, cy = c.center_y * n, r = c.radius * n;
    const long r0 = std::max(0L, static_cast<long>(std::floor(cy - r)));
    const long r1 = std::min(static_cast<long>(side) - 1, static_cast<long>(std::floor(cy + r)));
    const long c0 = std::max(0L, static_cast<long>(std::floor(cx - r)));
    const long c1 = std::min(static_cast<long>(side) - 1, static_cast<long>(std::floor(cx + r)));
    double* img = out.data() + c.material * npix;
    for (long row = r0; row <= r1; ++row)
      for (long col = c0; col <= c1; ++col) {
        std::size_t hits = 0;
        for (std::size_t a = 0; a < supersample; ++a)
          for (std::size_t b = 0; b < supersample; ++b) {
            const double px = static_cast<double>(col) + (static_cast<double>(b) + 0.5) / q;
            const double py = static_cast<double>(row) + (static_cast<double>(a) + 0.5) / q;
            if ((px - cx) * (px - cx) + (py - cy) * (py - cy) <= r * r) ++hits;
          }
        if (hits == 0) continue;
        const double cover = static_cast<double>(hits) / (q * q);
        double& v = img[static_cast<std::size_t>(row) * side + static_cast<std::size_t>(col)];
        v = (1.0 - cover) * v + cover * c.concentration;
      }
  }
  return out;
}

Vector bin_down(std::span<const double> image, std::size_t side, std::size_t channels, std::size_t factor) {
  require(factor >= 1 && side % factor == 0, "bin_down: side must be a multiple of factor");
  require(image.size() == side * side * channels, "bin_down: size mismatch");
  const std::size_t coarse = side / factor;
  Vector out(coarse * coarse * channels, 0.0);
  const double w = 1.0 / static_cast<double>(factor * factor);
  for (std::size_t ch = 0; ch < channels; ++ch)
    for (std::size_t r = 0; r < side; ++r)
      for (std::size_t c = 0; c < side; ++c)
        out[ch * coarse * coarse + (r / factor) * coarse + c / factor] += w * image[ch * side * side + r * side + c];
  return out;
}

PhantomSpec desk_phantom(std::size_t side, double insert_scale) {
  PhantomSpec spec;
  spec.image_side = side;
  spec.circles.push_back({0.5, 0.5, 0.42, 0, 1.0});
  const double ring = 0.25;
  for (int k = 0; k < 4; ++k) {
    const double radius = 0.035 + 0.012 * k;
    const double level = insert_scale * (0.5 + 0.5 * k);
    const double a_top = std::numbers::pi * (1.15 + 0.233 * k);
    const double a_bot = std::numbers::pi * (0.15 + 0.233 * k);
    spec.circles.push_back({0.5 + ring * std::cos(a_top), 0.5 + ring * std::sin(a_top), radius, 1, level});
    spec.circles.push_back({0.5 + ring * std::cos(a_bot), 0.5 + ring * std::sin(a_bot), radius, 2, level});
  }
  return spec;
}

RmseReport rmse(std::span<const double> x, std::span<const double> truth, std::size_t n_materials) {
  require(x.size() == truth.size(), "rmse: size mismatch");
  require(n_materials >= 1 && x.size() % n_materials == 0, "rmse: size is not a multiple of the material count");
  const std::size_t per = x.size() / n_materials;
  RmseReport rep;
  double all = 0.0;
  for (std::size_t m = 0; m < n_materials; ++m) {
    double s = 0.0;
    for (std::size_t i = m * per; i < (m + 1) * per; ++i) s += (x[i] - truth[i]) * (x[i] - truth[i]);
    all += s;
    rep.per_material.push_back(std::sqrt(s / static_cast<double>(per)));
  }
  rep.overall = std::sqrt(all / static_cast<double>(x.size()));
  return rep;
}

}  // namespace dihs
