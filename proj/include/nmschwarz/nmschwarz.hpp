#pragma once

#include "nmschwarz/quadrature.hpp"
#include "nmschwarz/mesh2d.hpp"
#include "nmschwarz/fields.hpp"
#include "nmschwarz/mortar.hpp"
#include "nmschwarz/fem_p1.hpp"
#include "nmschwarz/gmres.hpp"
#include "nmschwarz/schwarz.hpp"
#include "nmschwarz/legendre.hpp"
#include "nmschwarz/study.hpp"
