#pragma once

#include <stdexcept>
#include <string>

namespace sobdens {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Argument outside the open unit disk, or beyond a grid/quadrature cap.
struct DomainError : Error { using Error::Error; };
/// Pole or branch point hit while evaluating a map or its derivative.
struct SingularityError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
/// A geometric construction (cut, layer, partition) could not satisfy its invariants.
struct ConstructionError : Error { using Error::Error; };
struct ResolutionError : Error { using Error::Error; };
struct SolverError : Error {
    SolverError(const std::string& what, double residual_)
        : Error(what), residual(residual_) {}
    double residual;
};
struct IoError : Error { using Error::Error; };
struct DegenerateInputError : Error { using Error::Error; };

/// Runs f; an Error escaping it is rethrown as the same type with `prefix`
/// prepended to the message.
template <class F>
decltype(auto) with_context(const std::string& prefix, F&& f)
{
    try {
        return f();
    } catch (const SolverError& e) {
        throw SolverError(prefix + e.what(), e.residual);
    } catch (const DomainError& e) {
        throw DomainError(prefix + e.what());
    } catch (const SingularityError& e) {
        throw SingularityError(prefix + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + e.what());
    } catch (const ConstructionError& e) {
        throw ConstructionError(prefix + e.what());
    } catch (const ResolutionError& e) {
        throw ResolutionError(prefix + e.what());
    } catch (const IoError& e) {
        throw IoError(prefix + e.what());
    } catch (const DegenerateInputError& e) {
        throw DegenerateInputError(prefix + e.what());
    }
}

} // namespace sobdens
