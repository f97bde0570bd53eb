#pragma once

// route LAPACKE complex arguments through std::complex
#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>
