#pragma once

#include "tensorfill/completion.hpp"
#include "tensorfill/evaluate.hpp"
#include "tensorfill/json_forms.hpp"
#include "tensorfill/pipeline.hpp"
#include "tensorfill/series_csv.hpp"
#include "tensorfill/stack_io.hpp"
#include "tensorfill/sweep.hpp"
#include "tensorfill/synthetic.hpp"
#include "tensorfill/tensor_ops.hpp"
#include "tensorfill/trend_filter.hpp"
