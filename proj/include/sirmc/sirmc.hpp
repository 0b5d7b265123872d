#ifndef SIRMC_SIRMC_HPP_
#define SIRMC_SIRMC_HPP_

#include "sirmc/error.hpp"
#include "sirmc/prox.hpp"
#include "sirmc/spectral.hpp"
#include "sirmc/completion.hpp"
#include "sirmc/bench.hpp"
#include "sirmc/matio.hpp"
#include "sirmc/checks.hpp"

#endif // SIRMC_SIRMC_HPP_
