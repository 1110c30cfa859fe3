#pragma once

#include "sosc/catalog.hpp"
#include "sosc/certificate.hpp"
#include "sosc/exact_linalg.hpp"
#include "sosc/experiments.hpp"
#include "sosc/form.hpp"
#include "sosc/form_io.hpp"
#include "sosc/newton.hpp"
#include "sosc/polya.hpp"
#include "sosc/rational.hpp"
#include "sosc/report.hpp"
#include "sosc/sdp.hpp"
#include "sosc/serialization.hpp"
#include "sosc/sos.hpp"
