#ifndef SLFV_ERRORS_HPP
#define SLFV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace slfv
{

// Base of every error raised by the library.
class error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class invalid_measure : public error
{
public:
    using error::error;
};

class invalid_window : public error
{
public:
    using error::error;
};

class no_valid_delta : public error
{
public:
    using error::error;
};

// Raised when an operation's precondition was not established by the caller.
class contract_violation : public error
{
public:
    using error::error;
};

class not_found : public error
{
public:
    using error::error;
};

// The rejection sampler for the parent location could not find a point of the
// occupied set inside the event ball (only possible for seeds violating the
// positive-volume neighbourhood condition).
class degenerate_intersection : public error
{
public:
    using error::error;
};

class fit_undefined : public error
{
public:
    using error::error;
};

class config_error : public error
{
public:
    using error::error;
};

} // namespace slfv

#endif
