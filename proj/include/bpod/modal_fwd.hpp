#pragma once

#include <complex>

namespace bpod::modal {

template <typename Scalar>
struct ModeBasisT;

using ModeBasis = ModeBasisT<std::complex<double>>;
using ModeBasisReal = ModeBasisT<double>;

}  // namespace bpod::modal
