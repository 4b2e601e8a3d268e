#pragma once

// Everything, for applications. The numerics alone need only FFTW and the
// Boost headers; io/config/manifest add the vendored JSON and OpenSSL.

#include "errors.hpp"
#include "fft.hpp"
#include "spectral_core.hpp"
#include "multipliers.hpp"
#include "norms.hpp"
#include "random_fields.hpp"
#include "trajectory.hpp"
#include "dynamics.hpp"
#include "gauge.hpp"
#include "estimates.hpp"
#include "diophantine.hpp"
#include "io.hpp"
#include "config.hpp"
#include "manifest.hpp"
#include "app.hpp"
