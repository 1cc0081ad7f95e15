#ifndef SHUBIN_SHUBIN_HPP
#define SHUBIN_SHUBIN_HPP

#include "shubin/box.hpp"
#include "shubin/expression.hpp"
#include "shubin/hermite.hpp"
#include "shubin/hermite_basis.hpp"
#include "shubin/matrix_calculus.hpp"
#include "shubin/operator_algebra.hpp"
#include "shubin/operator_matrix.hpp"
#include "shubin/quadrature.hpp"
#include "shubin/quantizer.hpp"
#include "shubin/symbol.hpp"

#endif  // SHUBIN_SHUBIN_HPP
