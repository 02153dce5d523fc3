#ifndef SWITCHSIM_SWITCHSIM_HPP
#define SWITCHSIM_SWITCHSIM_HPP

#include "switchsim/state.hpp"
#include "switchsim/fields.hpp"
#include "switchsim/integrate.hpp"
#include "switchsim/analysis.hpp"
#include "switchsim/config.hpp"
#include "switchsim/io.hpp"
#include "switchsim/checks.hpp"
#include "switchsim/commands.hpp"

#endif  // SWITCHSIM_SWITCHSIM_HPP
