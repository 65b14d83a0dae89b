#pragma once

#include "torsion_moments/errors.hpp"
#include "torsion_moments/core_arith.hpp"
#include "torsion_moments/residue_algebra.hpp"
#include "torsion_moments/closed_forms.hpp"
#include "torsion_moments/local_counts.hpp"
#include "torsion_moments/orbit_engine.hpp"
#include "torsion_moments/moment_lab.hpp"
#include "torsion_moments/report_json.hpp"
#include "torsion_moments/verify.hpp"
