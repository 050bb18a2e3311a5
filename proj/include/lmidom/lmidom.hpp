#pragma once

// Everything except io.hpp, which needs nlohmann/json on the include path.

#include "lmidom/error.hpp"
#include "lmidom/matrix.hpp"
#include "lmidom/linalg.hpp"
#include "lmidom/pencil.hpp"
#include "lmidom/sdp.hpp"
#include "lmidom/radius.hpp"
#include "lmidom/inclusion.hpp"
#include "lmidom/cube.hpp"
#include "lmidom/minimize.hpp"
