// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eggp Authors

#pragma once

#include "eggp/dataset.hpp"
#include "eggp/egraph.hpp"
#include "eggp/egraph_io.hpp"
#include "eggp/eval.hpp"
#include "eggp/expr.hpp"
#include "eggp/fitting.hpp"
#include "eggp/generate.hpp"
#include "eggp/novelty.hpp"
#include "eggp/pareto.hpp"
#include "eggp/report.hpp"
#include "eggp/rewrite.hpp"
#include "eggp/search.hpp"
#include "eggp/symbol.hpp"
