#include <catch2/catch_amalgamated.hpp>
#include "bladeopt/commands.hpp"
