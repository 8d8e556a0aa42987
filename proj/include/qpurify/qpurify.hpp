#pragma once

#include "qpurify/errors.hpp"
#include "qpurify/combinatorics.hpp"
#include "qpurify/rates.hpp"
#include "qpurify/fock_state.hpp"
#include "qpurify/fock_channels.hpp"
#include "qpurify/fock_protocol.hpp"
#include "qpurify/gaussian.hpp"
#include "qpurify/sweep.hpp"
#include "qpurify/acceptance.hpp"
