#pragma once

namespace dsfmin {

/// Numerical thresholds shared by every stage. All of them can be overridden
/// from model files and the command line.
struct Tolerances {
    double pole = 1e-6;     ///< absolute distance under which two poles are the same pole
    double root = 1e-8;     ///< relative residual under which a numerator cancels a denominator root
    double eval = 1e-8;     ///< relative agreement required by rational-matrix equality
    double rank = 1e-8;     ///< singular values below rank * sigma_max count as zero
    double orth = 1e-8;     ///< support threshold relative to a vector's max-norm
    double structure = 1e-9;///< structural-zero threshold relative to the largest numerator coefficient
};

}  // namespace dsfmin
