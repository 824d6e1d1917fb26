#pragma once

#include "syncid/core.hpp"
#include "syncid/discrete.hpp"
#include "syncid/chua.hpp"
#include "syncid/history.hpp"
#include "syncid/delay.hpp"
#include "syncid/trace.hpp"
#include "syncid/config.hpp"
#include "syncid/harness.hpp"
