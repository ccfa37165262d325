#pragma once

#include "lensrank/classifiers.hpp"
#include "lensrank/cluster_indices.hpp"
#include "lensrank/common.hpp"
#include "lensrank/dataset.hpp"
#include "lensrank/expr.hpp"
#include "lensrank/folds.hpp"
#include "lensrank/measures.hpp"
#include "lensrank/regression.hpp"
#include "lensrank/search.hpp"
#include "lensrank/svg.hpp"
#include "lensrank/svm_smo.hpp"
#include "lensrank/visual_measures.hpp"
