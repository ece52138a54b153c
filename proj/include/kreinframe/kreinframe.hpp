#ifndef KREINFRAME_KREINFRAME_HPP
#define KREINFRAME_KREINFRAME_HPP

#include "kreinframe/bounds.hpp"
#include "kreinframe/error.hpp"
#include "kreinframe/jframe.hpp"
#include "kreinframe/jfusion.hpp"
#include "kreinframe/krein_space.hpp"
#include "kreinframe/linalg.hpp"
#include "kreinframe/oracle.hpp"
#include "kreinframe/subspace.hpp"
#include "kreinframe/tolerance.hpp"
#include "kreinframe/transforms.hpp"

#endif  // KREINFRAME_KREINFRAME_HPP
