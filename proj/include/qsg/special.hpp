#pragma once

namespace qsg::special {

double normal_pdf(double x);
double normal_cdf(double x);

/// Si(z) = int_0^z sin(t)/t dt.
double sine_integral(double z);

/// Cin(z) = int_0^z (1 - cos t)/t dt; even in z.
double cin(double z);

/// Ci(z) for z > 0.
double cosine_integral(double z);

}  // namespace qsg::special
