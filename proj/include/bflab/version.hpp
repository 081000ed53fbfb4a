#pragma once

#define BFLAB_VERSION "0.1.0"
