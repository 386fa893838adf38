#pragma once

#include "castguard/classifiers/adaboost.hpp"
#include "castguard/classifiers/classifier.hpp"
#include "castguard/classifiers/forest.hpp"
#include "castguard/classifiers/gaussian_process.hpp"
#include "castguard/classifiers/kernels.hpp"
#include "castguard/classifiers/knn.hpp"
#include "castguard/classifiers/mlp_classifier.hpp"
#include "castguard/classifiers/naive_bayes.hpp"
#include "castguard/classifiers/svm.hpp"
