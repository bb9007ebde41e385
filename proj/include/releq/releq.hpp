#pragma once

// Umbrella header.

#include "releq/errors.hpp"
#include "releq/liealg.hpp"
#include "releq/expression.hpp"
#include "releq/fd.hpp"
#include "releq/model.hpp"
#include "releq/system_document.hpp"
#include "releq/systems.hpp"
#include "releq/equilibria.hpp"
#include "releq/dynamics.hpp"
#include "releq/diagnostics.hpp"
#include "releq/report_io.hpp"
