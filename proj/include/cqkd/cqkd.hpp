#pragma once

#include "cqkd/errors.hpp"
#include "cqkd/occupation.hpp"
#include "cqkd/fock.hpp"
#include "cqkd/joint.hpp"
#include "cqkd/rng.hpp"
#include "cqkd/detector.hpp"
#include "cqkd/linalg.hpp"
#include "cqkd/attack.hpp"
#include "cqkd/protocol.hpp"
#include "cqkd/analysis.hpp"
#include "cqkd/report.hpp"
