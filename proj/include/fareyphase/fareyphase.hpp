#ifndef FAREYPHASE_FAREYPHASE_HPP
#define FAREYPHASE_FAREYPHASE_HPP

#include "balls.hpp"
#include "error.hpp"
#include "farey.hpp"
#include "partition.hpp"
#include "summation.hpp"
#include "thermo.hpp"
#include "transfer.hpp"
#include "version.hpp"

#endif
