#ifndef TAYLORLAW_TAYLORLAW_HPP
#define TAYLORLAW_TAYLORLAW_HPP

#include "taylorlaw/abundance_io.hpp"
#include "taylorlaw/dispersion_models.hpp"
#include "taylorlaw/mv_extraction.hpp"
#include "taylorlaw/point_patterns.hpp"
#include "taylorlaw/powerlaw_fit.hpp"
#include "taylorlaw/report.hpp"
#include "taylorlaw/student_t.hpp"

#endif  // TAYLORLAW_TAYLORLAW_HPP
