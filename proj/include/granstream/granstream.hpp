#pragma once

#include "granstream/csv_io.hpp"
#include "granstream/errors.hpp"
#include "granstream/evaluation.hpp"
#include "granstream/forgetting.hpp"
#include "granstream/generators.hpp"
#include "granstream/granulation.hpp"
#include "granstream/granule_model.hpp"
#include "granstream/model_io.hpp"
#include "granstream/preprocessing.hpp"
#include "granstream/str_tree.hpp"
#include "granstream/types.hpp"
