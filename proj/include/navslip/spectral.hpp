#pragma once

#include "navslip/spectral_scalar.hpp"
#include "navslip/state.hpp"

namespace navslip {

enum class Axis { X, Y, Z };

/// Collocation samples -> coefficients. Throws ShapeError when the sample
/// dimensions differ from (nx, ny, nz+1). For Odd parity the wall samples are
/// ignored (they are zero for any Odd field).
SpectralScalar transform_forward(const GridSamples& samples, Parity parity, const Grid& grid);

/// Coefficients -> collocation samples. Exact inverse of transform_forward on
/// band-limited data; Odd fields come back with exact zeros on the walls.
GridSamples transform_inverse(const SpectralScalar& field);

/// True when only the kx = ky = 0 column is nonzero (the field depends on z only).
bool horizontally_uniform(const SpectralScalar& f);

/// Spectral derivative. x and y multiply by i k (zero on Nyquist modes) and
/// keep parity; z maps Even -> Odd with factor -k pi and Odd -> Even with
/// factor +k pi.
SpectralScalar derivative(const SpectralScalar& field, Axis axis);

/// d f / d af - d h / d ah in one pass; both terms must share the result parity.
SpectralScalar derivative_difference(const SpectralScalar& f, Axis af, const SpectralScalar& h,
                                     Axis ah);

/// -|k|^2 multiplier with |k|^2 = kx^2 + ky^2 + (kz pi)^2.
SpectralScalar laplacian(const SpectralScalar& field);

/// True iff the mode survives the two-thirds truncation:
/// 3|kx| < nx, 3|ky| < ny and 3 kz < 2 nz.
bool is_retained(const Grid& g, int kx, int ky, int kz);

/// Zeroes every mode outside the two-thirds band. Idempotent.
SpectralScalar dealias(const SpectralScalar& field);
void dealias_in_place(SpectralScalar& field);

/// Orthogonal projection onto divergence-free fields with the slip parities.
/// Throws ParityError unless f1, f2 are Even and f3 is Odd.
VelocityState leray_project(SpectralScalar f1, SpectralScalar f2, SpectralScalar f3);
VelocityState leray_project(const VelocityState& f);

/// Spectral divergence (Even parity).
SpectralScalar divergence(const VelocityState& v);
/// Largest coefficient magnitude of the divergence.
double max_divergence(const VelocityState& v);

}  // namespace navslip
