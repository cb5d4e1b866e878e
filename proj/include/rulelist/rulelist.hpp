#pragma once

#include "rulelist/antecedent.hpp"
#include "rulelist/bitvector.hpp"
#include "rulelist/bounds.hpp"
#include "rulelist/capture.hpp"
#include "rulelist/dataset.hpp"
#include "rulelist/errors.hpp"
#include "rulelist/evaluate.hpp"
#include "rulelist/model.hpp"
#include "rulelist/naive_capture.hpp"
#include "rulelist/posterior.hpp"
#include "rulelist/search.hpp"
