#pragma once

// Every httplib include goes through here so the TLS switch is the same in
// every translation unit.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
