/*
 Copyright 2026 The sqrtcs Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace sqrtcs
{
    /// Base class of every error raised by the library.
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Cholesky pivot at or below tolerance (covariance not positive definite).
    class NotPositiveDefinite : public Error
    {
    public:
        using Error::Error;
    };

    /// QR factor lost full column rank.
    class RankDeficient : public Error
    {
    public:
        using Error::Error;
    };

    class ShapeMismatch : public Error
    {
    public:
        using Error::Error;
    };

    /// Argument outside the mathematical domain of a function (e.g. a probability outside (0,1)).
    class DomainError : public Error
    {
    public:
        using Error::Error;
    };

    class InvalidDimension : public Error
    {
    public:
        using Error::Error;
    };

    class InvalidParameter : public Error
    {
    public:
        using Error::Error;
    };

    class InvalidSpec : public Error
    {
    public:
        using Error::Error;
    };

    class DegenerateReference : public Error
    {
    public:
        using Error::Error;
    };

    class LayoutMismatch : public Error
    {
    public:
        using Error::Error;
    };

    class UnsupportedCone : public Error
    {
    public:
        using Error::Error;
    };

    /// Scenario configuration could not be turned into a problem.
    class ConfigError : public Error
    {
    public:
        using Error::Error;
    };

    /// A run report is missing or cannot be read back.
    class ReportError : public Error
    {
    public:
        using Error::Error;
    };

} // namespace sqrtcs
