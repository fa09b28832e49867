// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef OMD_ERRORS_HPP
#define OMD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace omd {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NonPositiveDefinite : public Error {
  public:
    using Error::Error;
};

class DimensionMismatch : public Error {
  public:
    using Error::Error;
};

class InfeasibleCovariance : public Error {
  public:
    using Error::Error;
};

class BisectionFailed : public Error {
  public:
    using Error::Error;
};

class OrderNotFound : public Error {
  public:
    using Error::Error;
};

// Malformed scenario/instance input (maps to CLI exit code 1).
class InvalidConfig : public Error {
  public:
    using Error::Error;
};

} // namespace omd

#endif
