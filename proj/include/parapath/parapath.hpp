#pragma once
#include <parapath/config.hpp>
#include <parapath/convergence.hpp>
#include <parapath/errors.hpp>
#include <parapath/metrics.hpp>
#include <parapath/model.hpp>
#include <parapath/models.hpp>
#include <parapath/noise.hpp>
#include <parapath/parallel.hpp>
#include <parapath/parareal.hpp>
#include <parapath/projection.hpp>
#include <parapath/schemes.hpp>
