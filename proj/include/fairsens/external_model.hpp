#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fairsens/sobol.hpp"

namespace fairsens {

// Line protocol for black-box predictors: each input row goes to the child's
// stdin as one headerless CSV line, the child answers with one numeric
// prediction per line, order preserved. A final empty line ends the session.
struct ExternalModelProtocol {
    std::string command;    // run via /bin/sh -c
    int batch_size = 256;   // rows written before draining replies
    int timeout_ms = 60000; // per batch
};

class ExternalModel {
public:
    explicit ExternalModel(ExternalModelProtocol protocol);
    ~ExternalModel();

    ExternalModel(const ExternalModel&) = delete;
    ExternalModel& operator=(const ExternalModel&) = delete;

    std::vector<double> query(const Eigen::MatrixXd& rows);

    // Adapter for the estimators; the returned function keeps a reference to
    // this object, which must outlive it.
    ModelFn as_fn();

private:
    void shutdown() noexcept;

    ExternalModelProtocol protocol_;
    int child_pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string read_buffer_;
};

std::vector<double> query_external_model(const ExternalModelProtocol& protocol,
                                         const Eigen::MatrixXd& rows);

} // namespace fairsens
