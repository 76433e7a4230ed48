#pragma once

// Finite-difference reference computations. Everything here is derived
// from the metric in coordinates, independently of the spectral library.

#include <array>
#include <cmath>
#include <functional>

namespace oracle {

using Fn2 = std::function<double(double, double)>;
using Point4 = std::array<double, 4>;
using Fn4 = std::function<double(const Point4&)>;

// 4th-order central difference.
template <class F>
double central(F&& f, double h) {
  return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
}

inline Fn2 du(Fn2 f, double h) {
  return [f, h](double u, double v) { return central([&](double s) { return f(u + s, v); }, h); };
}
inline Fn2 dv(Fn2 f, double h) {
  return [f, h](double u, double v) { return central([&](double s) { return f(u, v + s); }, h); };
}

inline Fn4 d(Fn4 f, int axis, double h) {
  return [f, axis, h](const Point4& x) {
    return central(
        [&](double s) {
          Point4 y = x;
          y[static_cast<std::size_t>(axis)] += s;
          return f(y);
        },
        h);
  };
}

// Gauss curvature of an orthogonal metric E du^2 + G dv^2.
inline double gauss_curvature(const Fn2& E, const Fn2& G, double u, double v, double h = 1e-3) {
  const Fn2 root = [E, G](double a, double b) { return std::sqrt(E(a, b) * G(a, b)); };
  const Fn2 Gu = du(G, h);
  const Fn2 Ev = dv(E, h);
  const Fn2 t1 = [Gu, root](double a, double b) { return Gu(a, b) / root(a, b); };
  const Fn2 t2 = [Ev, root](double a, double b) { return Ev(a, b) / root(a, b); };
  return -(du(t1, h)(u, v) + dv(t2, h)(u, v)) / (2 * root(u, v));
}

// Nonnegative Laplace-Beltrami on the round sphere of radius a in
// (colatitude, longitude).
inline double sphere_laplacian(const Fn2& f, double a, double theta, double phi, double h = 1e-3) {
  const Fn2 ft = du(f, h);
  const Fn2 flux = [ft](double t, double p) { return std::sin(t) * ft(t, p); };
  const double s = std::sin(theta);
  const double lap = du(flux, h)(theta, phi) / s + dv(dv(f, h), h)(theta, phi) / (s * s);
  return -lap / (a * a);
}

// Curvature of g_hat = e^{2w} dx^2 on flat T^4, from the coordinate formulas
// for a conformally flat metric.
struct ConformalFlat {
  Fn4 w;
  double h;

  std::array<Fn4, 4> grad() const {
    return {d(w, 0, h), d(w, 1, h), d(w, 2, h), d(w, 3, h)};
  }

  // Ric_hat_ij (coordinate components).
  double ricci(const Point4& x, int i, int j) const {
    const auto g = grad();
    double lap = 0, grad2 = 0;
    for (int k = 0; k < 4; ++k) {
      lap += d(g[static_cast<std::size_t>(k)], k, h)(x);
      const double gk = g[static_cast<std::size_t>(k)](x);
      grad2 += gk * gk;
    }
    const double hij = d(g[static_cast<std::size_t>(i)], j, h)(x);
    const double wi = g[static_cast<std::size_t>(i)](x);
    const double wj = g[static_cast<std::size_t>(j)](x);
    return -2 * (hij - wi * wj) - (i == j ? lap + 2 * grad2 : 0.0);
  }

  double scalar(const Point4& x) const {
    const auto g = grad();
    double lap = 0, grad2 = 0;
    for (int k = 0; k < 4; ++k) {
      lap += d(g[static_cast<std::size_t>(k)], k, h)(x);
      const double gk = g[static_cast<std::size_t>(k)](x);
      grad2 += gk * gk;
    }
    return std::exp(-2 * w(x)) * (-6 * lap - 6 * grad2);
  }

  // Nonnegative Laplacian of g_hat.
  double laplacian(const Fn4& f, const Point4& x) const {
    const Fn4 w_ = w;
    double div = 0;
    for (int i = 0; i < 4; ++i) {
      const Fn4 fi = d(f, i, h);
      const Fn4 flux = [w_, fi](const Point4& y) { return std::exp(2 * w_(y)) * fi(y); };
      div += d(flux, i, h)(x);
    }
    return -std::exp(-4 * w(x)) * div;
  }

  double q(const Point4& x) const {
    const ConformalFlat self = *this;
    const Fn4 R = [self](const Point4& y) { return self.scalar(y); };
    double ric2 = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const double r = ricci(x, i, j);
        ric2 += r * r;
      }
    ric2 *= std::exp(-4 * w(x));
    const double r = R(x);
    return (laplacian(R, x) + r * r - 3 * ric2) / 6;
  }

  // P_hat f = Delta_hat^2 f + delta_hat(((2/3) R_hat g_hat - 2 Ric_hat) df).
  double paneitz(const Fn4& f, const Point4& x) const {
    const ConformalFlat self = *this;
    const Fn4 lap_f = [self, f](const Point4& y) { return self.laplacian(f, y); };
    double div = 0;
    for (int j = 0; j < 4; ++j) {
      const Fn4 beta = [self, f, j](const Point4& y) {
        const double e = std::exp(-2 * self.w(y));
        double b = (2.0 / 3.0) * self.scalar(y) * d(f, j, self.h)(y);
        for (int l = 0; l < 4; ++l) b -= 2 * e * self.ricci(y, j, l) * d(f, l, self.h)(y);
        return std::exp(2 * self.w(y)) * b;
      };
      div += d(beta, j, h)(x);
    }
    return laplacian(lap_f, x) - std::exp(-4 * w(x)) * div;
  }
};

}  // namespace oracle
