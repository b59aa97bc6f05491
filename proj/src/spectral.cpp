#include "navslip/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>

#include "navslip/errors.hpp"

namespace navslip {

namespace {

// FFTW plans for one grid. Plans are made once with FFTW_ESTIMATE (so the
// chosen algorithm, and therefore the rounding, is reproducible) and executed
// through the new-array interface, which is thread-safe.
struct PlanSet {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
    fftw_plan dct = nullptr;  // REDFT00 along z over all nz+1 planes
    fftw_plan dst = nullptr;  // RODFT00 along z over interior planes 1..nz-1
    fftw_plan dct1 = nullptr;  // single-column versions for horizontally uniform fields
    fftw_plan dst1 = nullptr;

    PlanSet(const PlanSet&) = delete;
    PlanSet& operator=(const PlanSet&) = delete;

    explicit PlanSet(const Grid& g) {
        RealBuffer real(g.physical_size());
        ComplexBuffer spectrum(g.spectral_size());
        auto* cplx = reinterpret_cast<fftw_complex*>(spectrum.data());
        const int n2[2] = {g.ny, g.nx};
        const int plane = static_cast<int>(g.plane_size());
        const int splane = g.nkx() * g.ny;
        r2c = fftw_plan_many_dft_r2c(2, n2, g.nzp(), real.data(), nullptr, 1, plane, cplx,
                                     nullptr, 1, splane, FFTW_ESTIMATE);
        c2r = fftw_plan_many_dft_c2r(2, n2, g.nzp(), cplx, nullptr, 1, splane, real.data(),
                                     nullptr, 1, plane, FFTW_ESTIMATE);
        const int nzp = g.nzp();
        const fftw_r2r_kind even = FFTW_REDFT00;
        dct = fftw_plan_many_r2r(1, &nzp, plane, real.data(), nullptr, plane, 1, real.data(),
                                 nullptr, plane, 1, &even, FFTW_ESTIMATE);
        const int nint = g.nz - 1;
        const fftw_r2r_kind odd = FFTW_RODFT00;
        dst = fftw_plan_many_r2r(1, &nint, plane, real.data() + plane, nullptr, plane, 1,
                                 real.data() + plane, nullptr, plane, 1, &odd, FFTW_ESTIMATE);
        RealBuffer column(g.nzp());
        dct1 = fftw_plan_r2r_1d(nzp, column.data(), column.data(), FFTW_REDFT00, FFTW_ESTIMATE);
        dst1 = fftw_plan_r2r_1d(nint, column.data() + 1, column.data() + 1, FFTW_RODFT00,
                                FFTW_ESTIMATE);
        if (!r2c || !c2r || !dct || !dst || !dct1 || !dst1)
            throw std::runtime_error("FFTW planning failed");
    }
    ~PlanSet() {
        fftw_destroy_plan(r2c);
        fftw_destroy_plan(c2r);
        fftw_destroy_plan(dct);
        fftw_destroy_plan(dst);
        fftw_destroy_plan(dct1);
        fftw_destroy_plan(dst1);
    }
};

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

const PlanSet& plans_for(const Grid& g) {
    static std::map<std::tuple<int, int, int>, std::unique_ptr<PlanSet>> cache;
    std::lock_guard lock(plan_mutex());
    auto key = std::make_tuple(g.nx, g.ny, g.nz);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, std::make_unique<PlanSet>(g)).first;
    return *it->second;
}

void zero_plane(double* data, const Grid& g, int iz) {
    std::fill_n(data + static_cast<std::size_t>(iz) * g.plane_size(), g.plane_size(), 0.0);
}

void scale_plane(Complex* data, const Grid& g, int kz, double s) {
    const std::size_t n = static_cast<std::size_t>(g.nkx()) * g.ny;
    Complex* p = data + static_cast<std::size_t>(kz) * n;
    for (std::size_t i = 0; i < n; ++i) p[i] *= s;
}

void scale_real_plane(double* data, const Grid& g, int iz, double s) {
    double* p = data + static_cast<std::size_t>(iz) * g.plane_size();
    for (std::size_t i = 0; i < g.plane_size(); ++i) p[i] *= s;
}

// Every plane constant: the field depends on z only.
bool uniform_planes(const GridSamples& s) {
    const std::size_t plane = static_cast<std::size_t>(s.nx()) * s.ny();
    const double* d = s.data();
    for (int iz = 0; iz < s.nzp(); ++iz) {
        const double* p = d + iz * plane;
        bool differs = false;
        for (std::size_t i = 1; i < plane; ++i) differs |= p[i] != p[0];
        if (differs) return false;
    }
    return true;
}

}  // namespace

bool horizontally_uniform(const SpectralScalar& f) {
    const Grid& g = f.grid();
    const std::size_t splane = static_cast<std::size_t>(g.nkx()) * g.ny;
    const double* c = reinterpret_cast<const double*>(f.coeffs().data());
    for (int kz = 0; kz <= g.nz; ++kz) {
        const double* p = c + 2 * kz * splane;
        bool nonzero = p[1] != 0.0;
        for (std::size_t i = 2; i < 2 * splane; ++i) nonzero |= p[i] != 0.0;
        if (nonzero) return false;
    }
    return true;
}

SpectralScalar transform_forward(const GridSamples& samples, Parity parity, const Grid& grid) {
    if (samples.nx() != grid.nx || samples.ny() != grid.ny || samples.nzp() != grid.nzp())
        throw ShapeError("sample array is " + std::to_string(samples.nx()) + "x" +
                         std::to_string(samples.ny()) + "x" + std::to_string(samples.nzp()) +
                         ", grid expects " + std::to_string(grid.nx) + "x" +
                         std::to_string(grid.ny) + "x" + std::to_string(grid.nzp()));
    const PlanSet& plans = plans_for(grid);
    if (uniform_planes(samples)) {
        // z-only transform of the profile; the same result as the full path.
        RealBuffer col(grid.nzp());
        for (int iz = 0; iz <= grid.nz; ++iz) col[iz] = samples(0, 0, iz);
        const int nz = grid.nz;
        SpectralScalar out(grid, parity);
        if (parity == Parity::Even) {
            fftw_execute_r2r(plans.dct1, col.data(), col.data());
            col[0] /= 2.0 * nz;
            col[nz] /= 2.0 * nz;
            for (int k = 1; k < nz; ++k) col[k] /= nz;
        } else {
            fftw_execute_r2r(plans.dst1, col.data() + 1, col.data() + 1);
            col[0] = col[nz] = 0.0;
            for (int k = 1; k < nz; ++k) col[k] /= nz;
        }
        for (int k = 0; k <= nz; ++k) out.at(0, 0, k) = col[k];
        return out;
    }
    RealBuffer work(samples.values().begin(), samples.values().end());
    const std::size_t plane = grid.plane_size();
    const int nz = grid.nz;
    const double horiz = 1.0 / (static_cast<double>(grid.nx) * grid.ny);

    if (parity == Parity::Even) {
        fftw_execute_r2r(plans.dct, work.data(), work.data());
        scale_real_plane(work.data(), grid, 0, horiz / (2.0 * nz));
        scale_real_plane(work.data(), grid, nz, horiz / (2.0 * nz));
        for (int k = 1; k < nz; ++k) scale_real_plane(work.data(), grid, k, horiz / nz);
    } else {
        fftw_execute_r2r(plans.dst, work.data() + plane, work.data() + plane);
        zero_plane(work.data(), grid, 0);
        zero_plane(work.data(), grid, nz);
        for (int k = 1; k < nz; ++k) scale_real_plane(work.data(), grid, k, horiz / nz);
    }

    SpectralScalar out(grid, parity);
    fftw_execute_dft_r2c(plans.r2c, work.data(),
                         reinterpret_cast<fftw_complex*>(out.coeffs().data()));
    out.enforce_parity_conventions();
    return out;
}

GridSamples transform_inverse(const SpectralScalar& field) {
    const Grid& grid = field.grid();
    const PlanSet& plans = plans_for(grid);
    const int nz = grid.nz;
    if (horizontally_uniform(field)) {
        RealBuffer col(grid.nzp());
        for (int k = 0; k <= nz; ++k) col[k] = field.at(0, 0, k).real();
        if (field.parity() == Parity::Even) {
            for (int k = 1; k < nz; ++k) col[k] *= 0.5;
            fftw_execute_r2r(plans.dct1, col.data(), col.data());
        } else {
            for (int k = 0; k <= nz; ++k) col[k] *= 0.5;
            fftw_execute_r2r(plans.dst1, col.data() + 1, col.data() + 1);
            col[0] = col[nz] = 0.0;
        }
        GridSamples out(grid);
        const std::size_t plane = grid.plane_size();
        for (int iz = 0; iz <= nz; ++iz)
            std::fill_n(out.data() + iz * plane, plane, col[iz]);
        return out;
    }
    ComplexBuffer spectrum(field.coeffs().begin(), field.coeffs().end());
    if (field.parity() == Parity::Even) {
        for (int k = 1; k < nz; ++k) scale_plane(spectrum.data(), grid, k, 0.5);
    } else {
        for (int k = 0; k <= nz; ++k) scale_plane(spectrum.data(), grid, k, 0.5);
    }

    GridSamples out(grid);
    fftw_execute_dft_c2r(plans.c2r, reinterpret_cast<fftw_complex*>(spectrum.data()), out.data());
    const std::size_t plane = grid.plane_size();
    if (field.parity() == Parity::Even) {
        fftw_execute_r2r(plans.dct, out.data(), out.data());
    } else {
        fftw_execute_r2r(plans.dst, out.data() + plane, out.data() + plane);
        zero_plane(out.data(), grid, 0);
        zero_plane(out.data(), grid, nz);
    }
    return out;
}

namespace {

// Derivative multipliers for one field: i kx, i ky (zero on Nyquist) or the
// real wall-normal factor per kz.
struct Multiplier {
    Axis axis;
    std::vector<double> k;  // indexed by ikx, iky or kz

    Multiplier(const Grid& g, Axis a, Parity p) : axis(a) {
        if (a == Axis::X) {
            for (int ikx = 0; ikx < g.nkx(); ++ikx)
                k.push_back(2 * ikx == g.nx ? 0.0 : g.wave_x(ikx));
        } else if (a == Axis::Y) {
            for (int iky = 0; iky < g.ny; ++iky)
                k.push_back(2 * iky == g.ny ? 0.0 : g.wave_y(g.ky_of(iky)));
        } else {
            const bool to_odd = p == Parity::Even;
            for (int kz = 0; kz <= g.nz; ++kz) {
                double f = to_odd ? -g.wave_z(kz) : g.wave_z(kz);
                if (to_odd && (kz == 0 || kz == g.nz)) f = 0.0;
                k.push_back(f);
            }
        }
    }

    Complex apply(Complex c, int ikx, int iky, int kz) const {
        if (axis == Axis::Z) return k[kz] * c;
        const double w = axis == Axis::X ? k[ikx] : k[iky];
        return Complex(-w * c.imag(), w * c.real());
    }
};

Parity derivative_parity(Parity p, Axis a) { return a == Axis::Z ? flip(p) : p; }

}  // namespace

SpectralScalar derivative(const SpectralScalar& field, Axis axis) {
    const Grid& g = field.grid();
    const Multiplier m(g, axis, field.parity());
    SpectralScalar out(g, derivative_parity(field.parity(), axis));
    const auto in = field.coeffs();
    auto o = out.coeffs();
    std::size_t i = 0;
    for (int kz = 0; kz <= g.nz; ++kz)
        for (int iky = 0; iky < g.ny; ++iky)
            for (int ikx = 0; ikx < g.nkx(); ++ikx, ++i) o[i] = m.apply(in[i], ikx, iky, kz);
    out.enforce_parity_conventions();
    return out;
}

SpectralScalar derivative_difference(const SpectralScalar& f, Axis af, const SpectralScalar& h,
                                     Axis ah) {
    require_compatible(f.grid(), h.grid());
    const Parity p = derivative_parity(f.parity(), af);
    if (p != derivative_parity(h.parity(), ah))
        throw ParityError("derivative_difference of fields with different result parity");
    const Grid& g = f.grid();
    const Multiplier mf(g, af, f.parity()), mh(g, ah, h.parity());
    SpectralScalar out(g, p);
    const auto a = f.coeffs(), b = h.coeffs();
    auto o = out.coeffs();
    std::size_t i = 0;
    for (int kz = 0; kz <= g.nz; ++kz)
        for (int iky = 0; iky < g.ny; ++iky)
            for (int ikx = 0; ikx < g.nkx(); ++ikx, ++i)
                o[i] = mf.apply(a[i], ikx, iky, kz) - mh.apply(b[i], ikx, iky, kz);
    out.enforce_parity_conventions();
    return out;
}

SpectralScalar laplacian(const SpectralScalar& field) {
    const Grid& g = field.grid();
    SpectralScalar out(g, field.parity());
    for (int kz = 0; kz <= g.nz; ++kz) {
        const double kz2 = g.wave_z(kz) * g.wave_z(kz);
        for (int iky = 0; iky < g.ny; ++iky) {
            const double ky = g.wave_y(g.ky_of(iky));
            for (int ikx = 0; ikx < g.nkx(); ++ikx) {
                const double kx = g.wave_x(ikx);
                out.at(ikx, iky, kz) = -(kx * kx + ky * ky + kz2) * field.at(ikx, iky, kz);
            }
        }
    }
    return out;
}

bool is_retained(const Grid& g, int kx, int ky, int kz) {
    return 3 * std::abs(kx) < g.nx && 3 * std::abs(ky) < g.ny && 3 * kz < 2 * g.nz;
}

void dealias_in_place(SpectralScalar& field) {
    const Grid& g = field.grid();
    auto c = field.coeffs();
    const std::size_t row = g.nkx();
    const std::size_t plane = row * g.ny;
    int kx_keep = 0;
    while (kx_keep < g.nkx() && is_retained(g, kx_keep, 0, 0)) ++kx_keep;
    for (int kz = 0; kz <= g.nz; ++kz) {
        Complex* p = c.data() + kz * plane;
        if (!is_retained(g, 0, 0, kz)) {
            std::fill_n(p, plane, Complex{});
            continue;
        }
        for (int iky = 0; iky < g.ny; ++iky) {
            Complex* r = p + iky * row;
            if (!is_retained(g, 0, g.ky_of(iky), 0))
                std::fill_n(r, row, Complex{});
            else
                std::fill(r + kx_keep, r + row, Complex{});
        }
    }
}

SpectralScalar dealias(const SpectralScalar& field) {
    SpectralScalar out = field;
    dealias_in_place(out);
    return out;
}

VelocityState leray_project(SpectralScalar f1, SpectralScalar f2, SpectralScalar f3) {
    if (f1.parity() != Parity::Even || f2.parity() != Parity::Even ||
        f3.parity() != Parity::Odd)
        throw ParityError("leray_project expects parities (even, even, odd)");
    require_compatible(f1.grid(), f2.grid());
    require_compatible(f1.grid(), f3.grid());
    const Grid g = f1.grid();
    VelocityState out(std::move(f1), std::move(f2), std::move(f3));
    out.u3.enforce_parity_conventions();
    std::vector<double> kxs(g.nkx()), kys(g.ny);
    for (int ikx = 0; ikx < g.nkx(); ++ikx) kxs[ikx] = (2 * ikx == g.nx) ? 0.0 : g.wave_x(ikx);
    for (int iky = 0; iky < g.ny; ++iky)
        kys[iky] = (2 * iky == g.ny) ? 0.0 : g.wave_y(g.ky_of(iky));
    auto a = out.u1.coeffs(), b = out.u2.coeffs(), c = out.u3.coeffs();
    std::size_t i = 0;
    for (int kz = 0; kz <= g.nz; ++kz) {
        // The sine mode kz = nz does not exist on the grid, so the top plane
        // (like kz = 0) is projected with the horizontal wavevector only.
        const double kzw = (kz == 0 || kz == g.nz) ? 0.0 : g.wave_z(kz);
        for (int iky = 0; iky < g.ny; ++iky) {
            const double ky = kys[iky];
            for (int ikx = 0; ikx < g.nkx(); ++ikx, ++i) {
                const double kx = kxs[ikx];
                if (kx == 0.0 && ky == 0.0) {
                    c[i] = Complex{};
                    continue;
                }
                const double inv = 1.0 / (kx * kx + ky * ky + kzw * kzw);
                // divergence of this mode: n . u with n = (i kx, i ky, kz pi)
                const double dr = -kx * a[i].imag() - ky * b[i].imag() + kzw * c[i].real();
                const double di = kx * a[i].real() + ky * b[i].real() + kzw * c[i].imag();
                const double pr = dr * inv, pi = di * inv;
                // u -= conj-gradient of phi: (-i kx, -i ky, kz pi) phi
                a[i] -= Complex(kx * pi, -kx * pr);
                b[i] -= Complex(ky * pi, -ky * pr);
                c[i] -= Complex(kzw * pr, kzw * pi);
            }
        }
    }
    return out;
}

VelocityState leray_project(const VelocityState& f) { return leray_project(f.u1, f.u2, f.u3); }

SpectralScalar divergence(const VelocityState& v) {
    SpectralScalar d = derivative(v.u1, Axis::X);
    d += derivative(v.u2, Axis::Y);
    d += derivative(v.u3, Axis::Z);
    return d;
}

double max_divergence(const VelocityState& v) { return divergence(v).max_abs(); }

}  // namespace navslip
