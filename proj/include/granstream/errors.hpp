#pragma once

#include <stdexcept>
#include <string>

namespace granstream
{
	class Error : public std::runtime_error
	{
	public:
		using std::runtime_error::runtime_error;
	};

	// Caller broke a precondition (dimension mismatch, non-finite input, bad index).
	class ContractViolation : public Error
	{
	public:
		using Error::Error;
	};

	class EmptyModelError : public Error
	{
	public:
		EmptyModelError() : Error("granule set is empty") {}
		using Error::Error;
	};

	class EmptyBatchError : public Error
	{
	public:
		EmptyBatchError() : Error("batch is empty") {}
		using Error::Error;
	};

	class InsufficientSamplesError : public Error
	{
	public:
		using Error::Error;
	};

	// A prediction was requested before the first batch was observed.
	class ColdStartError : public Error
	{
	public:
		ColdStartError() : Error("no batch has been observed yet") {}
		using Error::Error;
	};

	class ConfigError : public Error
	{
	public:
		using Error::Error;
	};

	class IoError : public Error
	{
	public:
		using Error::Error;
	};

	// A single input record could not be parsed; readers count and skip these.
	class RecordError : public Error
	{
	public:
		using Error::Error;
	};

	namespace detail
	{
		inline void require(bool condition, const std::string& message)
		{
			if (!condition)
				throw ContractViolation(message);
		}
	}
}
