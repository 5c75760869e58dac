#pragma once

#include "ctxsearch/classifier.hpp"
#include "ctxsearch/environment.hpp"
#include "ctxsearch/erm.hpp"
#include "ctxsearch/errors.hpp"
#include "ctxsearch/harness.hpp"
#include "ctxsearch/margin_al.hpp"
#include "ctxsearch/mathstats.hpp"
#include "ctxsearch/meta.hpp"
#include "ctxsearch/run_record.hpp"
#include "ctxsearch/trisection.hpp"
